"""Gadget reductions between constraint templates and balanced digraphs.

A fixed-template constraint problem is compiled into a digraph problem
by replacing the template with a layered gadget digraph; the package
builds those gadgets, translates instances in both directions, solves
homomorphism questions outright, and transfers polymorphisms and linear
identity systems from a template onto its gadget.
"""

from .gadget import build_gadget, count_formula
from .lifting import lift_general, lift_wnu
from .reductions import backward_reduce, forward_translate, materialize
from .solver import digraph_hom_exists, find_homomorphism
from .structures import (Digraph, RelationalStructure,
                         collapse_to_single_relation)

__version__ = "0.1.0"

__all__ = [
    "Digraph",
    "RelationalStructure",
    "backward_reduce",
    "build_gadget",
    "collapse_to_single_relation",
    "count_formula",
    "digraph_hom_exists",
    "find_homomorphism",
    "forward_translate",
    "lift_general",
    "lift_wnu",
    "materialize",
    "__version__",
]
