"""shiftca: past-set towers, K-theoretic invariants, and truncated operator
checks for one-sided shift spaces presented by matrices, forbidden words, or
labeled graphs."""

__version__ = "0.1.0"

from .errors import ShiftSpaceError  # noqa: F401
from .presentations import Alphabet, Presentation, to_labeled_graph  # noqa: F401
from .tower import Tower, build_tower  # noqa: F401
from .invariants import (  # noqa: F401
    bowen_franks,
    ck_oracle,
    dimension_group,
    k_groups,
)
from .conditions import (  # noqa: F401
    Verdict,
    aperiodic_past,
    condition_I,
    condition_star,
    ideal_lattice,
    irreducible_past,
)
from .repcheck import (  # noqa: F401
    build_truncation,
    check_ck_relations,
    check_universal_relations,
)
