"""Simulator for type-2 machines with infinite oracle queries."""
from .errors import T2MError
from .seq import EvSeq, SeqTuple, seq
from .machine import MachineGraph, RunResult, Status, run, validate_graph
from .dsl import load_machine, parse_machine, print_machine
from .oracle import Oracle, lpo, max_oracle, run_with_oracle

__all__ = [
    "EvSeq", "SeqTuple", "seq", "MachineGraph", "RunResult", "Status", "run",
    "validate_graph", "load_machine", "parse_machine", "print_machine", "Oracle", "lpo",
    "max_oracle", "run_with_oracle", "T2MError",
]
