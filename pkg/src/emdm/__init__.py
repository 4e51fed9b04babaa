"""emdm: an (Elementary) Mathematical Data Model engine.

Schemas are catalogs of sets, mappings, constraints and Datalog programs.
The package validates instances, reasons about constraint sets, enumerates
E-R diagram cycles, evaluates Datalog and translates schemas to SQL.
"""

from .analysis import analyze, closure, detect_incoherence, minimize, oracle_certify
from .datalog.compiler import compile_to_ra
from .datalog.engine import evaluate, iteration_stats
from .ddl import coverage_report, emit_ddl
from .dsl import parse_schema, serialize_schema
from .erd import build_graph, classify, enumerate_cycles, export_dot
from .instance import parse_instance
from .model import Catalog, InstanceDB, registry_counts
from .store import load_catalog, meta_schema, reflect, save_catalog
from .validate import validate_schema
from .validator import check_constraint, discover_keys, validate_instance

__version__ = "0.1.0"

__all__ = [
    "Catalog", "InstanceDB", "analyze", "build_graph", "check_constraint", "classify", "closure",
    "compile_to_ra", "coverage_report", "detect_incoherence", "discover_keys", "emit_ddl", "enumerate_cycles",
    "evaluate", "export_dot", "iteration_stats", "load_catalog", "meta_schema", "minimize", "oracle_certify",
    "parse_instance", "parse_schema", "reflect", "registry_counts", "save_catalog", "serialize_schema",
    "validate_instance", "validate_schema",
]
