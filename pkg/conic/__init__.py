"""
Solver-neutral conic programs.

Expressions are affine in a flat vector of scalar decision variables. A
ProgramBuilder collects variables and zero/nonnegative/PSD constraint blocks,
and build() freezes them into a ConicProgram that the adapters in
conic.solvers hand to an actual solver.
"""
