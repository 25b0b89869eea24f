"""Ground-truth simulation, the always-on baseline and energy metrics."""
