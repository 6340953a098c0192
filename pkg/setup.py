from setuptools import setup

PACKAGE_NAME = "gauss_distill"

setup(
    name=PACKAGE_NAME,
    version="1.0.0",
    # Packages to export
    packages=[PACKAGE_NAME],
    install_requires=["setuptools", "numpy", "scipy"],
    extras_require={"test": ["pytest"]},
    python_requires=">=3.7",
    zip_safe=True,
    description=(
        "Simulation of Gaussian entanglement distillation with two-copy"
        " de-Gaussification."
    ),
    license="BSD 3-clause",
    entry_points={
        "console_scripts": [
            "gauss_distill = gauss_distill.cli:main",
        ],
    },
)
