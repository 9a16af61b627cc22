import pytest

from fairaudit.datasets import load_prepared, one_hot_encode
from fairaudit.sampledata import (
    write_adult_sample,
    write_compas_sample,
    write_crowd_sample,
    write_german_sample,
)


@pytest.fixture(scope="session")
def compas_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "compas.csv"
    write_compas_sample(str(path), n=1000, seed=7)
    return str(path)


@pytest.fixture(scope="session")
def german_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "german.csv"
    write_german_sample(str(path), n=1000, seed=11)
    return str(path)


@pytest.fixture(scope="session")
def adult_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "adult.csv"
    write_adult_sample(str(path), n=1000, seed=13)
    return str(path)


@pytest.fixture(scope="session")
def crowd_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("crowd")
    write_crowd_sample(str(directory), n_workers=60, seed=17)
    return str(directory)


@pytest.fixture(scope="session")
def compas_table(compas_csv):
    table, _, _ = load_prepared(compas_csv, "compas-binary")
    return one_hot_encode(table)


@pytest.fixture(scope="session")
def decile_table(compas_csv):
    table, _, _ = load_prepared(compas_csv, "compas-decile")
    return one_hot_encode(table)


@pytest.fixture(scope="session")
def german_table(german_csv):
    table, _, _ = load_prepared(german_csv, "german")
    return one_hot_encode(table)


@pytest.fixture(scope="session")
def adult_table(adult_csv):
    table, _, _ = load_prepared(adult_csv, "adult")
    return one_hot_encode(table)
