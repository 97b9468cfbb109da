"""
Homogeneous polynomials and the certificates built on them.

- `polysos.polynomials`: arithmetic, composition with linear maps, gradients
- `polysos.certificates`: SOS, SOS-convexity and cone-restricted quadratic
  certificates emitted into a conic.program.ProgramBuilder
"""
