#!/usr/bin/env python3
"""
Setup script for facepulse.

This script installs the facepulse package.
"""

import os

from setuptools import find_packages, setup

# Get version from package
with open(os.path.join("facepulse", "__init__.py"), "r") as f:
    for line in f:
        if line.startswith("__version__"):
            version = line.split("=")[1].strip().strip("\"'")
            break
    else:
        version = "0.1.0"  # Default version if not found

# Get long description from README
with open("README.md", "r") as f:
    long_description = f.read()

setup(
    name="facepulse",
    version=version,
    description="Remote photoplethysmography extraction and evaluation from facial video",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="facepulse Contributors",
    author_email="",
    packages=find_packages(include=["facepulse", "facepulse.*"]),
    package_data={"facepulse.data": ["*.txt"]},
    entry_points={
        "console_scripts": [
            "facepulse=facepulse.cli.main:main",
        ],
    },
    install_requires=[
        "pyyaml>=6.0",
        "pydantic>=2.0.0",
        "concurrent-log-handler>=0.9.20",
        "python-slugify>=8.0.4",
        "python-dotenv>=1.0.1",
        "numpy>=1.22",
        "scipy>=1.9",
        "pandas>=1.5",
        "scikit-learn>=1.1",
        "opencv-python-headless>=4.6",
        "matplotlib>=3.6",
    ],
    python_requires=">=3.9",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Medical Science Apps.",
    ],
)
