"""Ichnaea - energy-aware multi-robot exploration planner and simulator."""
