"""
SPDE Engine
===========
Numerical laboratory for stochastic degenerate parabolic-hyperbolic
equations on the periodic torus

    du + div(B(u)) dt = div(A(u)∇u) dt + Φ(u) dW

with a semi-implicit finite-volume solver, the regularization cascade
(η, R, τ), kinetic-formulation diagnostics and ensemble verification
reports.

Main Components:
    - models: grids, fields, coefficient profiles, problem specifications
    - data: seeded noise paths, run identity hashing
    - analytics: operators, hypothesis audit, kinetic and Itô residuals, norms
    - core: solver, cascade, ensemble and diagnostics runners, CLI
    - reporting: CSV/JSON exports and console summaries
    - config: settings, documented tolerances, run configuration
    - utils: logging, exceptions

Example:
    >>> from spde_engine.models import TorusGrid, RegularizationParams, catalog_problem
    >>> from spde_engine.core.solver import solve
    >>> from spde_engine.data.noise import sample_path
    >>> spec = catalog_problem("heat")
    >>> grid = TorusGrid(dim=1, points=64)
    >>> params = RegularizationParams(dt=2e-5, T=0.01)
    >>> traj = solve(spec, grid, params, sample_path(1, params.steps, params.dt, 0))
"""

__version__ = "1.0.0"
__author__ = "SPDE Engine Team"
