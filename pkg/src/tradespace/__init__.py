"""Trade-off space exploration for research ideation.

A library plus service for generating research ideas with a language
model, scoring them on user-selected bipolar dimensions, placing them in
a 3D evaluation cube, and steering, merging, and correcting them while
every step is recorded in a provenance graph.
"""

__version__ = "0.1.0"
