"""Forces on a neutral atom near a shielded slab.

Casimir-Polder attraction above planar multilayers, Yukawa and Newtonian
gravity of slab sources, and the Bloch-oscillation readout used to map the
reachable region of Yukawa parameter space.
"""

__version__ = "0.1.0"
