# Fair Cover Solver
# Colorful cover problems on graphs and axis-parallel lines

__version__ = "1.0.0"
