"""Deployed-bytecode retrieval from an Etherscan-style JSON API."""
from __future__ import annotations

import os

import requests

DEFAULT_ENDPOINT = "https://api.etherscan.io/api"
API_KEY_VAR = "ETHERSCAN_API_KEY"


class FetchError(RuntimeError):
    """The API returned an error or malformed payload."""


def fetch_bytecode(
    address: str,
    endpoint: str = DEFAULT_ENDPOINT,
    api_key: str | None = None,
    session: requests.Session | None = None,
    timeout: float = 30.0,
) -> bytes:
    """Fetch the deployed code at ``address`` via ``eth_getCode``.

    The API key defaults to the ``ETHERSCAN_API_KEY`` environment variable;
    an injectable ``session`` keeps the function testable offline.
    """
    api_key = api_key if api_key is not None else os.environ.get(API_KEY_VAR, "")
    params = {
        "module": "proxy",
        "action": "eth_getCode",
        "address": address,
        "tag": "latest",
        "apikey": api_key,
    }
    sess = session or requests.Session()
    resp = sess.get(endpoint, params=params, timeout=timeout)
    if resp.status_code != 200:
        raise FetchError(f"HTTP {resp.status_code} from {endpoint}")
    try:
        payload = resp.json()
    except ValueError as exc:
        raise FetchError(f"non-JSON response: {exc}") from exc
    if "result" not in payload or not isinstance(payload["result"], str):
        raise FetchError(f"unexpected payload: {payload!r}")
    result = payload["result"]
    if result.startswith("0x"):
        result = result[2:]
    try:
        return bytes.fromhex(result)
    except ValueError as exc:
        raise FetchError(f"result is not hex bytecode: {exc}") from exc
