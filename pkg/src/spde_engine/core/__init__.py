"""
Core Layer
==========
Time stepping, the vanishing-viscosity cascade, ensemble orchestration,
diagnostics runners and the spde-lab command line.
"""
