"""Equivalence checking of streaming data-string transducers."""
from ..ecorder import ec_extend, ec_step
from .check import DiffWitness, Equivalent, NotEquivalent, check_equivalence, describe_difference
from .onecounter import OneCounterMachine, zero_reachability, zero_reachable_exact
from .product import MODES, ProductState, build_product
from .witness import AbstractStep, ContractViolation, realize_witness
