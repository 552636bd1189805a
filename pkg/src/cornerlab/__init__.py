"""Symbolic workbench for blown-up corner spaces and polyhomogeneous bookkeeping.

Subpackages cover: exact index-set arithmetic (:mod:`cornerlab.indexsets`),
declarative blown-up spaces with face lattices and boundary fibrations
(:mod:`cornerlab.spaces`), composition calculi derived from triple spaces
(:mod:`cornerlab.rules`), parametrix order ledgers (:mod:`cornerlab.ledger`),
exact indicial-root bookkeeping with a numerical probe
(:mod:`cornerlab.spectral`), and a command line front end
(:mod:`cornerlab.cli`).
"""

from cornerlab.indexsets import EMPTY, NATURALS, IndexSet
from cornerlab.ledger import ReplayResult, replay
from cornerlab.linh import Lin
from cornerlab.rules import CalculusRule, compose_families, derive_composition_rule
from cornerlab.spaces import Fibration, Space, lattice_iso
from cornerlab.spectral import Surd, bessel_l2_probe, hodge_indicial_roots

__all__ = [
    "EMPTY",
    "NATURALS",
    "IndexSet",
    "Lin",
    "Surd",
    "Space",
    "Fibration",
    "CalculusRule",
    "ReplayResult",
    "lattice_iso",
    "derive_composition_rule",
    "compose_families",
    "replay",
    "hodge_indicial_roots",
    "bessel_l2_probe",
]
__version__ = "0.1.0"
