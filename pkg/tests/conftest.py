import pytest

from seqlcd.descriptor import sad_descriptor_set
from seqlcd.synthgen import SequenceSpec, WorldConfig, generate_sequence, generate_world


@pytest.fixture(scope="session")
def world():
    return generate_world(WorldConfig(seed=11))


@pytest.fixture(scope="session")
def dataset(world, tmp_path_factory):
    """Shared synthetic routes: 300-frame reference plus styled/warped variants."""
    root = tmp_path_factory.mktemp("synth")
    out = {}
    specs = {
        "ref": SequenceSpec(n_frames=300, condition="sunny", noise_seed=3),
        "warped": SequenceSpec(n_frames=300, condition="sunny", velocity_ratio=0.9, noise_seed=4),
        "foggy": SequenceSpec(n_frames=300, condition="foggy", noise_seed=5),
        "rainy": SequenceSpec(n_frames=300, condition="rainy", noise_seed=6),
    }
    for name, spec in specs.items():
        manifest, warp = generate_sequence(world, spec, root / name, "r1")
        out[name] = {"manifest": manifest, "warp": warp, "dir": root / name, "spec": spec}
    return out


@pytest.fixture(scope="session")
def descriptors(dataset):
    return {name: sad_descriptor_set(entry["manifest"]) for name, entry in dataset.items()}
