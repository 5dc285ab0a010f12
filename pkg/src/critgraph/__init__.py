"""Simulation and numerics for critical inhomogeneous random graphs.

Graphon-weighted percolation in the critical window, the rank-one graph
G(x, q), tilted p-trees, blob gluing, branching-process and resolvent
oracles, and the continuum limit objects they converge to.
"""

__version__ = "0.1.0"
