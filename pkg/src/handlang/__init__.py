"""handlang: a hand-gesture instruction pipeline at desk scale.

Gesture pairs map to language tokens; a debounce filter commits tokens
held for consecutive frames; a deterministic FSM assembles instructions;
a simulated robot executes them. A synthetic-vision recognizer (contour
matching or a small CNN) feeds the pipeline from rendered frames, and a
streaming session service plus CLI expose the whole path.
"""

__version__ = "0.1.0"
