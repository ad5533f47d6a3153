"""curvcheck: coordinate-chart curvature engine and identity certifier.

Builds semi-Riemannian metrics from component formulas, computes all
curvature objects pointwise from exact derivatives, and numerically
certifies curvature identities: pseudosymmetry-type conditions, the
Roter decomposition of the curvature tensor, warped-product block
formulas and geodesic-mapping compatibility equations.
"""

__version__ = "0.1.0"
