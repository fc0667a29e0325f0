"""Numerical laboratory for metric bi-Lipschitz invariants of algebraic germs.

The heavy lifting lives in the C++ extension ``germlab._core``; this package
re-exports its public surface. Installed builds place the extension inside
the package; development builds put it next to it on ``sys.path``.
"""

try:
    from ._core import (
        GermlabError,
        SampleCloud,
        VarietySpec,
        catalog_names,
        density_profile,
        make_ak,
        make_briancon_speder,
        make_brieskorn,
        parse_variety_config,
        run_scenario,
        sample_sphere_slice,
        separation_verdict,
        tangent_cone_sample,
        unit_ball_volume,
        weighted_scale,
    )
except ImportError:  # development layout: _core built out of tree
    from _core import (
        GermlabError,
        SampleCloud,
        VarietySpec,
        catalog_names,
        density_profile,
        make_ak,
        make_briancon_speder,
        make_brieskorn,
        parse_variety_config,
        run_scenario,
        sample_sphere_slice,
        separation_verdict,
        tangent_cone_sample,
        unit_ball_volume,
        weighted_scale,
    )

__all__ = [
    "GermlabError",
    "SampleCloud",
    "VarietySpec",
    "catalog_names",
    "density_profile",
    "make_ak",
    "make_briancon_speder",
    "make_brieskorn",
    "parse_variety_config",
    "run_scenario",
    "sample_sphere_slice",
    "separation_verdict",
    "tangent_cone_sample",
    "unit_ball_volume",
    "weighted_scale",
]
