import pytest

from plumestat import SubstitutionPolicy, load_dataset
from plumestat.analysis import AnalysisOptions, run_analysis
from plumestat.fixtures import make_basic, make_comprehensive


@pytest.fixture(scope="session")
def basic_inputs():
    return make_basic()


@pytest.fixture(scope="session")
def basic_dataset(basic_inputs):
    mon, wells, ovl = basic_inputs
    return load_dataset(mon, wells, ovl)


@pytest.fixture(scope="session")
def basic_analysis(basic_dataset):
    return run_analysis(basic_dataset)


@pytest.fixture(scope="session")
def comprehensive_inputs():
    return make_comprehensive()


@pytest.fixture(scope="session")
def comprehensive_dataset(comprehensive_inputs):
    mon, wells, ovl = comprehensive_inputs
    return load_dataset(mon, wells, ovl, policy=SubstitutionPolicy(0.5, True))


@pytest.fixture(scope="session")
def comprehensive_analysis(comprehensive_dataset):
    return run_analysis(comprehensive_dataset, AnalysisOptions(napl_substitute=True))
