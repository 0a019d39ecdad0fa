#!/usr/bin/env python
import os
from pathlib import Path
from setuptools import setup


if __name__ == "__main__":
    setup(
        name="pyrebal",
        version="0.3.0",
        extras_require=dict(),
        description="Exact multi-worker assembly line rebalancing with fairness and similarity objectives",
        long_description=(Path(__file__).parent / "README.md").read_text(),
        license="GNU General Public License v2.0",
        classifiers=[
            "License :: OSI Approved :: GNU General Public License v2 (GPLv2)",
            "Programming Language :: Python :: 3.8",
            "Programming Language :: Python :: 3.9",
            "Programming Language :: Python :: 3.10",
            "Programming Language :: Python :: 3.11",
            "Operating System :: OS Independent",
        ],
        packages=[
            "pyrebal",
        ],
        setup_requires=["setuptools"],
        install_requires=["pyparsing>=3.0", "numpy", "pandas"],
        entry_points={
            "console_scripts": ["pyrebal=pyrebal.pyrebal:run"],
        },
    )
