"""Security analysis workbench for architectural system models.

Associates attack pattern, weakness, and vulnerability records to the
components of a directed attributed system graph via ranked text
retrieval, and supports what-if architecture comparison through
filtering, exposure reports, and surface diffing.
"""

from .analysis import (
    ExposureReport,
    FilterSpec,
    SurfaceDiff,
    compare_surfaces,
    exposure_report,
    filter_surface,
    severity_view,
)
from .corpus import (
    AttackVectorDocument,
    Band,
    Corpus,
    DocKind,
    Scheme,
    SeverityLabel,
    build_corpus,
    dump_snapshot,
    expand_crossrefs,
    load_snapshot,
    parse_attack_patterns,
    parse_vulnerabilities,
    parse_weaknesses,
)
from .model import (
    Attribute,
    Component,
    Connection,
    ModelDiff,
    Mutation,
    SystemModel,
    Violation,
    apply_diff,
    apply_mutation,
    apply_mutations,
    diff_models,
    parse_model,
    serialize_model,
    validate_model,
)
from .retrieval import (
    AssociationConfig,
    AttackSurface,
    Match,
    RetrievalIndex,
    associate,
    build_index,
    query,
    tokenize,
)

__version__ = "0.1.0"
