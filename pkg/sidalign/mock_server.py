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
"""
Fixture-replaying server for the remote scoring and compression protocols.

Every ``*.json`` file of the fixture directory is either a scoring fixture
``{"request": {...}, "response": {"logprobs": [...]}}`` or a list of compression fixtures
``[{"cot": str, "summary": str}, ...]``. Matching requests are answered verbatim.

"""

import argparse
import json
import pathlib
from importlib import resources
from typing import List

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

__all__ = ["create_app", "default_fixture_dir", "main"]


class ScoreRequest(BaseModel):
    context_tokens: List[str]
    candidates: List[List[str]]


class CompressRequest(BaseModel):
    system: str
    cot: str


def default_fixture_dir():
    """Return the directory of the bundled fixtures."""
    return pathlib.Path(str(resources.files("sidalign").joinpath("data/fixtures")))


def _score_key(context_tokens, candidates):
    return json.dumps([list(context_tokens), [list(tokens) for tokens in candidates]])


def _load_fixtures(fixture_dir):
    scores, summaries = {}, {}
    for path in sorted(pathlib.Path(fixture_dir).glob("*.json")):
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
        if isinstance(document, dict) and "request" in document:
            request = document["request"]
            key = _score_key(request["context_tokens"], request["candidates"])
            scores[key] = document["response"]
        elif isinstance(document, list):
            for entry in document:
                summaries[entry["cot"]] = entry["summary"]
        else:
            raise ValueError("Unrecognised fixture file {0}.".format(path))
    return scores, summaries


def create_app(fixture_dir=None):
    """
    Build the mock server application.

    Parameters
    ----------
    fixture_dir : str or pathlib.Path, optional
        Directory of fixture files. Defaults to the bundled fixtures.

    Returns
    -------
    app : fastapi.FastAPI
        Application serving ``/v1/health``, ``/v1/score`` and ``/v1/compress``. Malformed
        requests get HTTP 400 and requests without a fixture HTTP 404, both with a body
        ``{"error": str}``.

    """
    scores, summaries = _load_fixtures(fixture_dir or default_fixture_dir())
    app = FastAPI(title="sidalign mock server")

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request: Request, exc: RequestValidationError):
        errors = "; ".join("{0}: {1}".format(".".join(str(part) for part in err["loc"]),
                                              err["msg"]) for err in exc.errors())
        return JSONResponse(status_code=400, content={"error": errors or "malformed request"})

    @app.post("/v1/health")
    def health():
        return {"status": "ok"}

    @app.post("/v1/score")
    def score(body: ScoreRequest):
        if not body.candidates:
            return JSONResponse(status_code=400, content={"error": "candidates is empty"})
        response = scores.get(_score_key(body.context_tokens, body.candidates))
        if response is None:
            return JSONResponse(status_code=404, content={"error": "no fixture for request"})
        return response

    @app.post("/v1/compress")
    def compress(body: CompressRequest):
        if body.cot not in summaries:
            return JSONResponse(status_code=404, content={"error": "no fixture for cot"})
        return {"summary": summaries[body.cot]}

    return app


def main(argv=None):
    """Serve the fixtures with uvicorn."""
    import uvicorn

    parser = argparse.ArgumentParser(prog="python -m sidalign.mock_server",
                                     description="Replay remote protocol fixtures.")
    parser.add_argument("--fixtures", default=None, help="fixture directory")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args(argv)
    uvicorn.run(create_app(args.fixtures), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
