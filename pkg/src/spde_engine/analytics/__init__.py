"""
Analytics Layer
===============
Discrete operators, hypothesis audit, norms and seminorms, kinetic and
Itô-formula residuals.

Submodules are imported explicitly (e.g. spde_engine.analytics.kinetic);
kinetic and ito depend on the models and data layers only.
"""
