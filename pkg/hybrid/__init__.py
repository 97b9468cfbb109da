"""
Linear hybrid control systems (HCS) and linear hybrid algebraic systems (HAS).

- `hybrid.systems` holds the immutable data model and its validators
- `hybrid.reduction` lifts box-constrained inputs into states and projects
  unconstrained inputs away
- `hybrid.serializers` reads and writes the JSON system description
"""
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent / "data"
