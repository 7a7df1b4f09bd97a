from lorentz_lab.utils.utils import add_snake_case_names

bound_suites = {
    "affine-length",
    "projected-length",
    "endpoint-distance",
}
metric_space_suites = {
    "cover-diameter",
    "growth",
}
covering_suites = {
    "slab-cover",
}
geometry_suites = {
    "hypothesis",
    "jacobi",
    "gauss",
    "oracle",
}
isometry_suites = {
    "slab-intersection",
    "divergence",
    "orbit-returns",
}
certified_suites = bound_suites | covering_suites | {"slab-intersection"}
de_sitter_suites = {
    "oracle",
    "divergence",
}
all_suites = (
    bound_suites | metric_space_suites | covering_suites | geometry_suites | isometry_suites
)
accepted_suite_names = add_snake_case_names(all_suites)

# Side files each suite writes next to report.json
suite_side_files = {
    "affine-length": {"worst_trajectory.csv", "bound.csv"},
    "projected-length": {"worst_trajectory.csv", "bound.csv"},
    "endpoint-distance": {"worst_trajectory.csv", "bound.csv"},
    "cover-diameter": {"covers.csv"},
    "growth": {"diameter_curve.csv"},
    "slab-cover": {"cover_balls.csv", "net_nodes.csv"},
    "hypothesis": set(),
    "jacobi": {"curvature_samples.csv", "jacobi_checks.csv"},
    "gauss": set(),
    "oracle": {"oracle.csv"},
    "slab-intersection": {"experiment.json", "diameter_march.csv"},
    "divergence": set(),
    "orbit-returns": {"orbit_returns.csv"},
}
# Canonical run order of ``verify all``
suite_order = [
    "hypothesis",
    "oracle",
    "affine-length",
    "projected-length",
    "endpoint-distance",
    "cover-diameter",
    "growth",
    "jacobi",
    "gauss",
    "slab-cover",
    "slab-intersection",
    "divergence",
    "orbit-returns",
]
