"""Queueing model and optimal dispatch/charging policies for an autonomous electric ride-hailing zone."""

__version__ = "0.1.0"
