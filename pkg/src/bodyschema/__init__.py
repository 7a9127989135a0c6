"""Online DH calibration of a simulated arm with cost-sensitive active learning."""

__version__ = "0.1.0"
