"""
Soliton surfaces of the CP^(N-1) sigma model immersed in su(N).

The package builds the Veronese projector chain, the linear spectral
problem and its wavefunctions, the ST/CD/FG immersion formulas, and checks
their geometry (metric, curvatures, Euler characteristic) through residuals.
"""

__version__ = "0.1.0"

from soliton_surfaces.cpn_model import ProjectorChain, veronese_chain  # noqa: E402
from soliton_surfaces.gauges import Family  # noqa: E402
from soliton_surfaces.immersion import (  # noqa: E402
    ImmersionField,
    curvature_sweep,
    immersion_c,
    immersion_cd,
    immersion_fg,
    immersion_g,
    immersion_gwfi,
    immersion_st,
    st_cd_fg_master,
)
from soliton_surfaces.linear_spectral import potentials, wavefunction  # noqa: E402
from soliton_surfaces.surface_io import GridSpec, SurfaceMesh, sample_surface  # noqa: E402
from soliton_surfaces.verification import (  # noqa: E402
    VerificationConfig,
    VerificationReport,
    run_verification_suite,
)

__all__ = [
    "__version__",
    "Family",
    "GridSpec",
    "ImmersionField",
    "ProjectorChain",
    "SurfaceMesh",
    "VerificationConfig",
    "VerificationReport",
    "curvature_sweep",
    "immersion_c",
    "immersion_cd",
    "immersion_fg",
    "immersion_g",
    "immersion_gwfi",
    "immersion_st",
    "potentials",
    "run_verification_suite",
    "sample_surface",
    "st_cd_fg_master",
    "veronese_chain",
    "wavefunction",
]
