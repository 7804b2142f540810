# Normal Deformations - G-structure deformation toolkit

__version__ = "0.3.0"
