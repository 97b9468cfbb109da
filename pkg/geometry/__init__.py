"""
Polyhedral cones and conic partitions of direction space.

- `geometry.cones`: H/V representations, preimages, intersections and the
  double description enumeration of generators
- `geometry.fans`: face fans of sphere-sampled polytopes and partition checks
- `geometry.serializers`: partition JSON for user-supplied partitions
"""
