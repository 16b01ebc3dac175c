"""Packaged data files for facepulse (canonical mesh)."""
