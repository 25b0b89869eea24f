"""Receding-horizon mission planning."""
