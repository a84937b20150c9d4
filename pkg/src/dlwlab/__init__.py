"""dlwlab: a symbolic-numeric laboratory for a (1+1)-dimensional
dispersive long-wave system.

The package verifies, with exact rational arithmetic, the point
symmetries, adjoint symmetries, multipliers, conservation laws (direct,
variational, and formal-Lagrangian constructions), Hamiltonian structure,
and traveling-wave first integrals of the coupled system

    u_t + u u_x + v_x = 0
    v_t + u_x v + u v_x + u_xxx/3 = 0

and exercises the verified conserved densities inside a finite-difference
solver with runtime monitoring.
"""

__version__ = "0.1.0"
