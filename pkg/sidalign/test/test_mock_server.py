# -*- coding: utf-8 -*-
# The sidalign library provides training-free inference-time alignment for
# semantic-ID generative recommenders that reason before they recommend.
#
# Copyright (C) 2026 The sidalign Development Team
#
# This file is part of sidalign.
#
# sidalign is free software; you can redistribute it and/or
# modify it under the terms of the GNU General Public License
# as published by the Free Software Foundation; either version 3
# of the License, or (at your option) any later version.
#
# sidalign is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program; if not, see <http://www.gnu.org/licenses/>
#
# --
"""Test the remote protocols against the fixture-replaying mock server."""

import json

from fastapi.testclient import TestClient
from numpy.testing import assert_equal, assert_raises
import pytest

from sidalign.backend import RemoteBackend, score_candidates
from sidalign.compress import compress_remote, CompressorConfig, RemoteCompressor
from sidalign.mock_server import create_app, default_fixture_dir
from sidalign.utils import BackendUnavailable, BudgetExceeded, NonConformingReply, \
    RemoteProtocolError, RemoteUnavailable
from sidalign.vocab import parse_sid, Vocabulary


@pytest.fixture
def client():
    with TestClient(create_app()) as test_client:
        yield test_client


def _score_fixture():
    with open(default_fixture_dir() / "score_basic.json", encoding="utf-8") as handle:
        return json.load(handle)


def test_remote_backend_round_trips_fixture(client):
    r"""Test the remote backend returns the fixture log-probabilities bit for bit."""
    fixture = _score_fixture()
    vocab = Vocabulary(3, 8)
    candidates = [parse_sid("".join(tokens), vocab) for tokens in fixture["request"]["candidates"]]
    backend = RemoteBackend("http://testserver", vocab, client=client)
    scores = score_candidates(backend, fixture["request"]["context_tokens"], candidates)
    assert scores == fixture["response"]["logprobs"]
    assert backend.health()


def test_mock_server_rejects_malformed_requests(client):
    r"""Test malformed requests get HTTP 400 with a structured error body."""
    response = client.post("/v1/score", json={"context_tokens": "not a list"})
    assert_equal(response.status_code, 400)
    assert isinstance(response.json()["error"], str)
    response = client.post("/v1/score", content=b"{not json",
                           headers={"content-type": "application/json"})
    assert_equal(response.status_code, 400)
    assert "error" in response.json()
    response = client.post("/v1/score", json={"context_tokens": ["<|sid_begin|>"],
                                              "candidates": []})
    assert_equal(response.status_code, 400)
    response = client.post("/v1/compress", json={"cot": "missing system"})
    assert_equal(response.status_code, 400)


def test_mock_server_unknown_request(client):
    r"""Test a valid request without fixture is a protocol error for the client."""
    response = client.post("/v1/score", json={"context_tokens": ["<|sid_begin|>"],
                                              "candidates": [["<s_0_0>", "<s_1_0>", "<s_2_0>"]]})
    assert_equal(response.status_code, 404)
    backend = RemoteBackend("http://testserver", Vocabulary(3, 8), client=client)
    assert_raises(RemoteProtocolError, score_candidates, backend, ["<|sid_begin|>"],
                  [parse_sid("<s_0_0><s_1_0><s_2_0>", backend.vocab)])


def test_remote_backend_unreachable():
    r"""Test an unreachable server raises BackendUnavailable."""
    vocab = Vocabulary(3, 8)
    with RemoteBackend("http://127.0.0.1:9", vocab, timeout=1.0) as backend:
        assert_raises(BackendUnavailable, score_candidates, backend, ["<|sid_begin|>"],
                      [parse_sid("<s_0_0><s_1_0><s_2_0>", vocab)])
        assert not backend.health()
    assert backend._client.is_closed


def test_compress_remote_verbatim_and_extracted(client):
    r"""Test conforming replies are accepted and embedded sentences extracted."""
    cfg = CompressorConfig()
    cot = ("I need to analyze the history. First, the user keeps buying retro handheld "
           "consoles.")
    assert_equal(compress_remote(cot, "http://testserver", cfg, client=client),
                 "The current user's preference is retro handheld consoles.")
    assert_equal(compress_remote("Okay, lots of jazz records in the history.",
                                 "http://testserver", cfg, client=client),
                 "The current user's preference is jazz vinyl.")


def test_compress_remote_errors(client, tmp_path):
    r"""Test non-conforming, over-budget and unreachable compressors."""
    cfg = CompressorConfig()
    assert_raises(NonConformingReply, compress_remote, "This chain cannot be summarized.",
                  "http://testserver", cfg, client=client)
    # no fixture for this chain
    assert_raises(RemoteUnavailable, compress_remote, "unknown chain", "http://testserver", cfg,
                  client=client)
    long_summary = "The current user's preference is " + " ".join(["x"] * 40) + "."
    (tmp_path / "long.json").write_text(json.dumps([{"cot": "long", "summary": long_summary}]))
    with TestClient(create_app(tmp_path)) as long_client:
        compressor = RemoteCompressor("http://testserver", cfg, client=long_client)
        assert_raises(BudgetExceeded, compressor, "long")
    assert_raises(RemoteUnavailable, compress_remote, "anything", "http://127.0.0.1:9", cfg)


def test_compressor_uses_shipped_prompt(tmp_path):
    r"""Test the compressor carries the shipped system message."""
    summary = "The current user's preference is tea."
    (tmp_path / "c.json").write_text(json.dumps([{"cot": "c", "summary": summary}]))
    with TestClient(create_app(tmp_path)) as fresh:
        compressor = RemoteCompressor("http://testserver", CompressorConfig(), client=fresh)
        assert "user profiling expert" in compressor.system
        assert "The current user's preference is" in compressor.system
        assert_equal(compressor("c"), summary)
