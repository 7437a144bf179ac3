"""Gesture segmentation of robot kinematic trajectories.

Segments multi-channel kinematic recordings into gesture classes by
fitting a Gaussian mixture over sliding-window-augmented states,
initialized from a handful of annotated demonstrations.
"""

from kinseg.ingest import Demonstration, Transcript, parse_kinematics, parse_transcript

__all__ = [
    "Demonstration",
    "Transcript",
    "parse_kinematics",
    "parse_transcript",
]

__version__ = "0.1.0"
