import pytest

from geotag.config import ModelConfig
from geotag.synthdata import default_gazetteer, default_templates
from geotag.corpus import synth_generate


@pytest.fixture(scope="session")
def small_corpus():
    """200 synthetic tweets from 30 places and 10 templates."""
    return synth_generate(default_gazetteer(30), default_templates(10), 200, seed=1)


@pytest.fixture
def tiny_config():
    return ModelConfig(m=12, K=6, filter_widths=(2, 3), feature_maps=4, dense_hidden=8,
                       batch_size=8, epochs=2, seed=3)
