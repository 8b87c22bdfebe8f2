"""
Carbon-aware co-design test suite
"""
