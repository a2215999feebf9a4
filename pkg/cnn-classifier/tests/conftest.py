import json
import subprocess
import sys

import pytest


def generate_dataset(directory, *, n_human, n_nonhuman, trace_len, snr_db_range, seed):
    """Produce a labelled corpus through the otfs-jrc command line."""
    config = directory.parent / f"{directory.name}_config.json"
    config.write_text(
        json.dumps(
            {
                "dataset": {
                    "n_human": n_human,
                    "n_nonhuman": n_nonhuman,
                    "trace_len": trace_len,
                    "snr_db_range": list(snr_db_range),
                }
            }
        )
    )
    subprocess.run(
        [
            sys.executable,
            "-m",
            "otfs_jrc",
            "dataset",
            "--config",
            str(config),
            "--seed",
            str(seed),
            "--out",
            str(directory),
        ],
        check=True,
        capture_output=True,
    )
    return directory


@pytest.fixture(scope="session")
def small_dataset_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("corpus") / "small"
    return generate_dataset(
        directory, n_human=100, n_nonhuman=100, trace_len=64, snr_db_range=(10.0, 20.0), seed=12
    )


@pytest.fixture(scope="session")
def gate_dataset_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("corpus") / "gate"
    return generate_dataset(
        directory,
        n_human=1000,
        n_nonhuman=1000,
        trace_len=512,
        snr_db_range=(0.0, 20.0),
        seed=99,
    )
