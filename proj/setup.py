"""Builds the _afdi extension from the same sources as the CMake build."""

import glob
import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

here = os.path.dirname(os.path.abspath(__file__))

eigen_candidates = ["/usr/include/eigen3", "/usr/local/include/eigen3"]
eigen_include = next((p for p in eigen_candidates if os.path.isdir(p)), eigen_candidates[0])

ext = Pybind11Extension(
    "_afdi",
    sorted(glob.glob(os.path.join(here, "src", "*.cpp")))
    + [os.path.join(here, "python", "afdi_module.cpp")],
    include_dirs=[os.path.join(here, "include"), os.path.join(here, "vendor"), eigen_include],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
