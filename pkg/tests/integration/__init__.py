"""
Integration tests for grid runs and the sensor-mcda CLI
"""
