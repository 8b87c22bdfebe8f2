"""
Core package for run configuration, command envelopes and shared errors.
"""
