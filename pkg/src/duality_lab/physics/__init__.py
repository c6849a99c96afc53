"""Energy densities, functionals and their variations.

Import from the submodules directly; ``dynamics`` depends on ``physics.constants``.
"""
