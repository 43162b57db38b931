import numpy as np
import pytest
from dotenv import load_dotenv

from note2ucdi.Note2UCDI import Note2UCDI, ReferenceTemplate, create_note2ucdi
from note2ucdi.imgcore.io import write_image
from note2ucdi.imgcore.models import RasterImage
from note2ucdi.tests.synthetic import SyntheticNote, make_note

load_dotenv()


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    for name in ("NOTE2UCDI_CONFIG", "NOTE2UCDI_LOG_LEVEL", "NOTE2UCDI_WORKERS"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def note() -> SyntheticNote:
    return make_note(seed=7)


@pytest.fixture(scope="session")
def wide_note() -> SyntheticNote:
    """Same note with room around it for perspective warps."""
    return make_note(margin=70, seed=7)


@pytest.fixture(scope="session")
def engine() -> Note2UCDI:
    return create_note2ucdi()


@pytest.fixture(scope="session")
def reference(engine: Note2UCDI, note: SyntheticNote) -> ReferenceTemplate:
    return engine.prepare_reference(note.image)


@pytest.fixture
def random_rgb(rng: np.random.Generator) -> RasterImage:
    return RasterImage(pixels=rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8))


@pytest.fixture
def note_files(tmp_path, note: SyntheticNote):
    """Reference and an exact copy written as PNG files."""
    ref_path = tmp_path / "ref.png"
    copy_path = tmp_path / "copy.png"
    write_image(note.image, ref_path)
    write_image(note.image, copy_path)
    return ref_path, copy_path
