"""Digital language support assessment from per-tool supported-language lists."""

__version__ = "0.1.0"

from .categories import CATEGORIES, CATEGORY_NAMES, Category, item_ids
from .codemap import AliasTable, Iso639Table, map_harvest, map_name, normalize_name
from .growth import CurveFit, GrowthCurveClassifier, Level, breakpoints, fit_curve
from .irt import IRFModel, RestScoreIRT, fit_irf
from .mokken import ItemBank, MokkenScale, expand_items, h_polytomous, h_report, h_scale
from .registry import HarvestRecord, ToolSpec, harvest_all, harvest_tool, load_registry
from .scoring import SubscaleScorer, SupportMatrix, build_matrix, category_counts, compute_boundaries

__all__ = [
    "AliasTable", "CATEGORIES", "CATEGORY_NAMES", "Category", "CurveFit", "GrowthCurveClassifier",
    "HarvestRecord", "IRFModel", "ItemBank", "Iso639Table", "Level", "MokkenScale",
    "RestScoreIRT", "SubscaleScorer", "SupportMatrix", "ToolSpec", "breakpoints", "build_matrix",
    "category_counts", "compute_boundaries", "expand_items", "fit_curve", "fit_irf",
    "h_polytomous", "h_report", "h_scale", "harvest_all", "harvest_tool", "item_ids",
    "load_registry", "map_harvest", "map_name", "normalize_name",
]
