"""
Core package
Quadrature, storage, parallel execution, logging and error handling
"""
