"""Formal explanations, feature relevancy and exact Shapley values for
small discrete classifiers."""

__version__ = "0.1.0"

from .model import (DecisionList, DecisionTree, FeatureSpace, ModelError, DomainError, Path,
                    TruthTable, consistent_path, evaluate, load_model, read_model, save_model,
                    tabulate, write_model)
from .explain import (ExplanationProblem, ExplanationSets, FeatureStatus, Instance,
                      check_duality, enumerate_explanations, feature_status, find_axp, find_cxp,
                      is_axp, is_cxp, is_weak_axp, is_weak_cxp, minimal_hitting_sets)
from .shapley import (IssueReport, ShapleyReport, detect_issues, phi, render_decimal,
                      shapley_oracle, shapley_value, shapley_values, upsilon, upsilon_count)
from .audit import (AnchorVerdict, PathAuditRow, Verdict, audit_all_paths, audit_path,
                    check_anchor, explain_dl)


def fixture_path(name: str):
    """Filesystem path of a bundled fixture, e.g. ``fixture_path("dt_fig1.json")``."""
    from importlib.resources import files
    return files(__name__).joinpath("fixtures", name)
