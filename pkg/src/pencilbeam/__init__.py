"""Localization-aware pencil beamforming: EMF exposure and throughput simulator."""

__version__ = "0.1.0"
