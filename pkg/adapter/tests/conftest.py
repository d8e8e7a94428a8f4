import pytest
import transformers

from hf_adapter import AdapterHTTPServer, ServedModel, build_tiny_gpt2

transformers.utils.logging.disable_progress_bar()


@pytest.fixture(scope="module")
def model_dir(tmp_path_factory):
    return build_tiny_gpt2(tmp_path_factory.mktemp("model") / "tiny-byte", seed=7)


@pytest.fixture(scope="module")
def server(model_dir):
    with AdapterHTTPServer(ServedModel(model_dir, model_id="tiny-byte")) as srv:
        yield srv
