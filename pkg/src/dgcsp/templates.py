"""Small canned templates used in tests, docs and the selftest suite."""

from __future__ import annotations

from .structures import RelationalStructure


def two_cycle():
    """The directed 2-cycle: domain {0,1}, edges both ways."""
    return RelationalStructure(["0", "1"], [("E", 2, [("0", "1"), ("1", "0")])])


def one_element():
    """A single element with a unary relation containing it."""
    return RelationalStructure(["a"], [("R", 1, [("a",)])])


def parity_template():
    """Domain {0,1} with one 4-ary relation: the first three coordinates
    have even parity and the last is fixed to 1."""
    tuples = [("0", "0", "0", "1"), ("0", "1", "1", "1"),
              ("1", "0", "1", "1"), ("1", "1", "0", "1")]
    return RelationalStructure(["0", "1"], [("R", 4, tuples)])


def leq_template():
    """The order relation on {0,1}: pairs (x,y) with x <= y."""
    return RelationalStructure(
        ["0", "1"], [("E", 2, [("0", "0"), ("0", "1"), ("1", "1")])])


def zigzag_digraph_template():
    """The 4-vertex zigzag path as a single-relation template.

    Vertices are named by their path position in binary: 00 -> 01 <- 10 -> 11.
    """
    return RelationalStructure(
        ["00", "01", "10", "11"],
        [("E", 2, [("00", "01"), ("10", "01"), ("10", "11")])])
