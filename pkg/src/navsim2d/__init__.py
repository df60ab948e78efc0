"""2D LiDAR navigation simulation toolkit.

Procedural map generators with a navigability guarantee, occupancy-grid A*
planning, a batched holonomic robot simulator with raycast LiDAR, a Carrot
pure-pursuit baseline, and a seeded evaluation harness.
"""

import os

# Allow oversubscribed worker counts (the bench compares 1 vs 8 threads even
# on smaller machines). Must be set before numba is first imported.
os.environ.setdefault("NUMBA_NUM_THREADS", str(max(8, os.cpu_count() or 1)))

__version__ = "0.1.0"

OBS_SPEC_VERSION = "obs-v1"
MAP_FORMAT_VERSION = 1
