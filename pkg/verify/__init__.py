"""
Numerical oracle for solved invariant sets.

`verify.support` evaluates support functions and exposed points for each
template; `verify.checks` samples directions to check the invariance
inequalities, safe-set and objective inclusion, homogeneity and convexity.
"""
