from setuptools import setup, find_packages


setup(
    name="mdl_snr",
    version="0.1.0",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    package_data={"mdl_snr": ["scenario_configs/*.json"]},
    install_requires=[
        "numpy",
        "scipy",
        "pandas",
        "h5py"]
)
