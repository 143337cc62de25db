"""Out-of-bag assessment: OOB measures, curves and permutation importance."""

from foresttune.oob.curves import OobCurve, oob_curve, oob_evaluation, oob_measure, tree_grid
from foresttune.oob.importance import ImportanceReport, importance_stability, permutation_importance
