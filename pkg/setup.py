from setuptools import setup

setup(
    name="dunkl-square",
    version="0.1.0",
    packages=["src"],
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "tqdm>=4.65.0",
    ],
    entry_points={
        "console_scripts": [
            "dunkl-square=src.cli:main",
        ],
    },
    python_requires=">=3.8",
)
