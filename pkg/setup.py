import setuptools


with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()


setuptools.setup(
    name="roabp-pit",
    version="0.1.0",
    author="Bernhard Mallinger",
    author_email="bernhard.mallinger@eox.com",
    description="Identity testing for read-once oblivious arithmetic branching programs",
    license="MIT",
    install_requires=[
        "galois",
        "numpy",
        "click",
        "PyYAML",
        "typed_json_dataclass==1.2.1",
    ],
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests"]),
    entry_points={"console_scripts": ["roabp-pit = roabp_pit.cli:main"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
)
