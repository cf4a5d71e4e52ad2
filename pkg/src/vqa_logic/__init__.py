"""Visual question answering by compiling questions to first-order rules
and checking them against scene-graph facts."""

__version__ = "0.1.0"
