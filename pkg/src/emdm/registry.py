"""The builtin constraint-type registry.

61 (E)MDM constraint types plus the two implicit relational ones (domain and
referential integrity), 63 entries in all.  The table is static; every
catalog shares it.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

CATEGORIES = ("set", "mapping", "object", "relational")

SUBCATEGORIES = (
    ("general set", "set"),
    ("dyadic relation", "set"),
    ("general mapping", "mapping"),
    ("autofunction", "mapping"),
    ("general function product", "mapping"),
    ("homogeneous binary function product", "mapping"),
    ("function diagram", "mapping"),
    ("object", "object"),
    ("relational", "relational"),
)

_SUBCATEGORY_OF = dict(SUBCATEGORIES)


@dataclass(frozen=True)
class ConstraintTypeInfo:
    tag: str
    abbreviation: str
    category: str
    subcategory: str
    fundamental: bool
    description: str = ""

    @property
    def emdm(self) -> bool:
        return self.category != "relational"


def _t(tag, abbr, sub, fundamental, description=""):
    return ConstraintTypeInfo(tag, abbr, _SUBCATEGORY_OF[sub], sub, fundamental, description)


_GS = "general set"
_DR = "dyadic relation"
_GM = "general mapping"
_AF = "autofunction"
_FP = "general function product"
_HB = "homogeneous binary function product"
_FD = "function diagram"

REGISTRY: tuple[ConstraintTypeInfo, ...] = (
    # general set
    _t("set_inclusion", "incl", _GS, True, "S is a subset of T"),
    _t("set_equality", "seteq", _GS, False, "S equals T"),
    _t("set_disjointness", "disj", _GS, True, "sets pairwise disjoint"),
    _t("set_union", "union", _GS, False, "U is the union of the parts"),
    _t("set_direct_sum", "dsum", _GS, False, "U is the union of disjoint parts"),
    # dyadic relation
    _t("dyadic_reflexivity", "refl", _DR, True),
    _t("dyadic_irreflexivity", "irrefl", _DR, False),
    _t("dyadic_symmetry", "sym", _DR, False),
    _t("dyadic_asymmetry", "asym", _DR, False),
    _t("dyadic_transitivity", "trans", _DR, False),
    _t("dyadic_intransitivity", "intrans", _DR, False),
    _t("dyadic_euclideanity", "eucl", _DR, False),
    _t("dyadic_ineuclideanity", "ineucl", _DR, False),
    _t("dyadic_equivalence", "equiv", _DR, False),
    _t("dyadic_acyclicity", "acyclic", _DR, False),
    _t("dyadic_connectivity", "conn", _DR, False),
    # general mapping
    _t("map_totality", "total", _GM, False, "no null values"),
    _t("map_nonprimeness", "nonprime", _GM, True, "part of no key"),
    _t("map_one_to_one", "oneone", _GM, True, "single key"),
    _t("map_ontoness", "onto", _GM, True, "image covers the codomain"),
    _t("map_bijectivity", "bij", _GM, False, "one-to-one and onto"),
    _t("map_default_value", "default", _GM, False, "declared default conforms"),
    # autofunction
    _t("auto_reflexivity", "refl", _AF, False),
    _t("auto_irreflexivity", "irrefl", _AF, False),
    _t("auto_null_reflexivity", "nullrefl", _AF, False),
    _t("auto_symmetry", "sym", _AF, False),
    _t("auto_asymmetry", "asym", _AF, False),
    _t("auto_null_symmetry", "nullsym", _AF, False),
    _t("auto_idempotency", "idem", _AF, False),
    _t("auto_anti_idempotency", "antiidem", _AF, False),
    _t("auto_null_idempotency", "nullidem", _AF, False),
    _t("auto_acyclicity", "acyclic", _AF, False),
    _t("auto_canonical_surjectivity", "csurj", _AF, False),
    # general function product
    _t("fp_key", "key", _FP, True, "minimal one-to-oneness (concatenated key)"),
    _t("fp_existence", "exists", _FP, True),
    _t("fp_nonexistence", "nonexists", _FP, True),
    # homogeneous binary function product
    _t("hbfp_irreflexivity", "irrefl", _HB, True),
    _t("hbfp_null_reflexivity", "nullrefl", _HB, False),
    _t("hbfp_symmetry", "sym", _HB, True),
    _t("hbfp_asymmetry", "asym", _HB, True),
    _t("hbfp_null_symmetry", "nullsym", _HB, False),
    _t("hbfp_transitivity", "trans", _HB, True),
    _t("hbfp_intransitivity", "intrans", _HB, True),
    _t("hbfp_null_transitivity", "nulltrans", _HB, False),
    _t("hbfp_euclideanity", "eucl", _HB, True),
    _t("hbfp_ineuclideanity", "ineucl", _HB, True),
    _t("hbfp_null_euclideanity", "nulleucl", _HB, False),
    _t("hbfp_equivalence", "equiv", _HB, False),
    _t("hbfp_acyclicity", "acyclic", _HB, True),
    _t("hbfp_connectivity", "conn", _HB, True),
    # function diagram
    _t("fd_commutativity", "comm", _FD, True),
    _t("fd_anti_commutativity", "anticomm", _FD, True),
    _t("fd_local_commutativity", "lcomm", _FD, False),
    _t("fd_local_anti_commutativity", "lanticomm", _FD, False),
    _t("fd_local_acyclicity", "lacyclic", _FD, False),
    _t("fd_local_symmetry", "lsym", _FD, False),
    _t("fd_local_asymmetry", "lasym", _FD, False),
    _t("fd_local_idempotency", "lidem", _FD, False),
    _t("fd_local_anti_idempotency", "lantiidem", _FD, False),
    _t("fd_generalized_commutativity", "gencomm", _FD, True),
    # object
    _t("object", "object", "object", True, "closed Horn clause"),
    # relational, implicit
    _t("rel_domain", "domain", "relational", False, "values conform to codomain"),
    _t("rel_referential_integrity", "refint", "relational", False, "references resolve"),
)

BY_TAG: dict[str, ConstraintTypeInfo] = {info.tag: info for info in REGISTRY}

# Local diagram constraints are the autofunction property of the composed path.
LOCAL_TO_AUTO = {
    "fd_local_commutativity": "auto_reflexivity",
    "fd_local_anti_commutativity": "auto_irreflexivity",
    "fd_local_acyclicity": "auto_acyclicity",
    "fd_local_symmetry": "auto_symmetry",
    "fd_local_asymmetry": "auto_asymmetry",
    "fd_local_idempotency": "auto_idempotency",
    "fd_local_anti_idempotency": "auto_anti_idempotency",
}

# Pair-level property name of each dyadic / HBFP tag.
PAIR_PROPERTY = {
    info.tag: info.tag.split("_", 1)[1]
    for info in REGISTRY
    if info.subcategory in (_DR, _HB)
}


def lookup(tag: str) -> ConstraintTypeInfo:
    return BY_TAG[tag]


def tags_with_abbreviation(abbr: str) -> list[str]:
    return [info.tag for info in REGISTRY if info.abbreviation == abbr]


def counts() -> dict:
    """Census of the registry, keyed the way `registry_counts` reports it."""
    emdm = [i for i in REGISTRY if i.emdm]
    per_category = Counter(i.category for i in REGISTRY)
    per_subcategory = Counter(i.subcategory for i in REGISTRY)
    fundamental = sum(1 for i in emdm if i.fundamental)
    return {
        "total": len(REGISTRY),
        "emdm": len(emdm),
        "per_category": {c: per_category[c] for c in CATEGORIES},
        "per_subcategory": {s: per_subcategory[s] for s, _ in SUBCATEGORIES},
        "subcategories": len(SUBCATEGORIES),
        "fundamental": fundamental,
        "derived": len(emdm) - fundamental,
    }
