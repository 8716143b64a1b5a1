"""Observed convergence orders from manufactured solutions.

With the continuous residual as forcing and tau tied to h^2 the error is
dominated by space and halves twice per refinement. For the time order we
force with the residual of the discrete spatial operator instead; the
spatial error then cancels and only the Euler error remains.
"""

from deadoil import builtin_set
from deadoil.oracle import refinement_studies

space, time = refinement_studies(builtin_set(), T=0.02, levels=4)
print("space (tau ~ h^2, analytic forcing)")
print(space)
print("\ntime (15 x 15 interior nodes, discrete forcing)")
print(time)
