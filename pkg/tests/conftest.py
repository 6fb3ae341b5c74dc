import hashlib
import json
import math
import sys
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

STUB_DIM = 8


def stub_embedding(text: str, dim: int = STUB_DIM) -> list[float]:
    """Deterministic pseudo-embedding derived from a text digest."""
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    values = [digest[i % len(digest)] / 255.0 + 0.01 for i in range(dim)]
    norm = math.sqrt(sum(v * v for v in values))
    return [v / norm for v in values]


class _StubHandler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def _send(self, code, payload):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/info":
            self._send(
                200,
                {"dim": STUB_DIM, "model": "stub", "max_tokens": 64, "segmentation": "word"},
            )
        else:
            self._send(404, {"error": "not found"})

    def do_POST(self):
        if self.path != "/embed":
            self._send(404, {"error": "not found"})
            return
        length = int(self.headers.get("Content-Length", 0))
        request = json.loads(self.rfile.read(length))
        texts = request["texts"]
        self._send(200, {"dim": STUB_DIM, "vectors": [stub_embedding(t) for t in texts]})


@pytest.fixture(scope="session")
def stub_provider_url():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def write_jsonl(path: Path, records) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path


@pytest.fixture
def corpus_file(tmp_path):
    """Two laws, three articles, Vietnamese-flavoured text."""
    return write_jsonl(
        tmp_path / "corpus.jsonl",
        [
            {
                "law_id": "45/2013/QH13",
                "articles": [
                    {"article_id": "1", "title": "Phạm vi", "text": "đất đai quyền sử_dụng"},
                    {"article_id": "2", "title": "", "text": "nghĩa_vụ thi_hành án"},
                ],
            },
            {
                "law_id": "91/2015/QH13",
                "articles": [
                    {"article_id": "74", "title": "Pháp_nhân", "text": "tài_sản độc_lập"},
                ],
            },
        ],
    )


@pytest.fixture
def qa_file(tmp_path):
    return write_jsonl(
        tmp_path / "qa.jsonl",
        [
            {
                "question": "quyền sử_dụng đất đai",
                "relevant_articles": [{"law_id": "45/2013/QH13", "article_id": "1"}],
            },
            {
                "question": "tài_sản của pháp_nhân",
                "relevant_articles": [
                    {"law_id": "91/2015/QH13", "article_id": "74"},
                    {"law_id": "45/2013/QH13", "article_id": "2"},
                ],
            },
        ],
    )
