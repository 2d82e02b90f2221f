"""Client for external black-box policies speaking the JSON-lines protocol.

One request per line, one response per line, over a subprocess's stdio or a
TCP socket.  Responses are cached per state; because the protocol promises a
deterministic policy, a cache mismatch is reported as a protocol violation
rather than silently accepted.
"""

from __future__ import annotations

import json
import os
import select
import shlex
import socket
import subprocess
import time
from dataclasses import dataclass

from ..errors import DeterminismViolationError, PolicyQueryError
from ..factored_space import factorization_to_dict

RPC_SCHEMA = "stache-policy-rpc/1"


@dataclass
class ProtocolConfig:
    timeout: float = 10.0
    connect_retries: int = 5
    retry_delay: float = 0.2


class _SubprocessChannel:
    """Line-delimited JSON over an unbuffered child process pipe."""

    def __init__(self, argv):
        self.proc = subprocess.Popen(
            argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, bufsize=0
        )
        self._buf = bytearray()

    def send_line(self, text):
        self.proc.stdin.write((text + "\n").encode())
        self.proc.stdin.flush()

    def recv_line(self, timeout):
        deadline = time.monotonic() + timeout
        while True:
            cut = self._buf.find(b"\n")
            if cut >= 0:
                line = bytes(self._buf[:cut])
                del self._buf[: cut + 1]
                return line.decode()
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError("no response before timeout")
            ready, _, _ = select.select([self.proc.stdout], [], [], remaining)
            if not ready:
                raise TimeoutError("no response before timeout")
            chunk = os.read(self.proc.stdout.fileno(), 65536)
            if not chunk:
                raise EOFError("endpoint closed its output")
            self._buf += chunk

    def close(self):
        if self.proc.poll() is None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()


class _TcpChannel:
    def __init__(self, host, port, config: ProtocolConfig):
        last = None
        for _ in range(max(1, config.connect_retries)):
            try:
                self.sock = socket.create_connection((host, port), config.timeout)
                break
            except OSError as exc:
                last = exc
                time.sleep(config.retry_delay)
        else:
            raise ConnectionError(f"cannot reach {host}:{port}: {last}")
        self._buf = bytearray()

    def send_line(self, text):
        self.sock.sendall((text + "\n").encode())

    def recv_line(self, timeout):
        deadline = time.monotonic() + timeout
        while True:
            cut = self._buf.find(b"\n")
            if cut >= 0:
                line = bytes(self._buf[:cut])
                del self._buf[: cut + 1]
                return line.decode()
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError("no response before timeout")
            self.sock.settimeout(remaining)
            try:
                chunk = self.sock.recv(65536)
            except socket.timeout:
                raise TimeoutError("no response before timeout") from None
            if not chunk:
                raise EOFError("endpoint closed the connection")
            self._buf += chunk

    def close(self):
        self.sock.close()


class ExternalPolicy:
    """Policy proxy over a JSON-lines endpoint; concurrent use is serialized
    by going through one ordered channel."""

    def __init__(self, channel, factorization, n_actions=None, config=None,
                 name="external"):
        self._channel = channel
        self.factorization = factorization
        self.n_actions = n_actions
        self.config = config or ProtocolConfig()
        self.metadata = {"name": name, "source": "external"}
        self._cache = {}
        self._next_id = 0
        self._handshake()

    def _handshake(self):
        hello = {
            "type": "hello",
            "schema": RPC_SCHEMA,
            "factorization": factorization_to_dict(self.factorization),
        }
        self._channel.send_line(json.dumps(hello))
        resp = self._recv(None)
        if resp.get("type") != "ready":
            raise PolicyQueryError(None, f"handshake rejected: {resp}")

    def _recv(self, state):
        try:
            line = self._channel.recv_line(self.config.timeout)
            return json.loads(line)
        except (TimeoutError, EOFError, OSError, json.JSONDecodeError) as exc:
            raise PolicyQueryError(state, f"endpoint failure ({exc})") from exc

    def _state_payload(self, state):
        self.factorization.validate_state(state)
        return {f.name: v for f, v in zip(self.factorization.factors, state)}

    def _check_action(self, state, action):
        if isinstance(action, bool) or not isinstance(action, int):
            raise PolicyQueryError(state, f"non-integer action {action!r}")
        if self.n_actions is not None and not 0 <= action < self.n_actions:
            raise PolicyQueryError(state, f"action {action} out of range")

    def _record(self, state, action):
        self._check_action(state, action)
        prev = self._cache.get(state)
        if prev is not None and prev != action:
            raise DeterminismViolationError(state, prev, action)
        self._cache[state] = action
        return action

    def _request(self, payload, state):
        self._next_id += 1
        payload = {"id": self._next_id, **payload}
        self._channel.send_line(json.dumps(payload))
        resp = self._recv(state)
        if resp.get("id") != self._next_id:
            raise PolicyQueryError(state, f"response id mismatch: {resp}")
        if "error" in resp:
            raise PolicyQueryError(state, f"endpoint error {resp['error']!r}")
        return resp

    def query(self, state) -> int:
        cached = self._cache.get(state)
        if cached is not None:
            return cached
        resp = self._request(
            {"type": "act", "state": self._state_payload(state)}, state
        )
        if "action" not in resp:
            raise PolicyQueryError(state, f"malformed response: {resp}")
        return self._record(state, resp["action"])

    def query_batch(self, states):
        states = list(states)
        if not states:
            return []
        resp = self._request(
            {"type": "act_batch",
             "states": [self._state_payload(s) for s in states]},
            states[0],
        )
        actions = resp.get("actions")
        if not isinstance(actions, list) or len(actions) != len(states):
            raise PolicyQueryError(states[0], f"misaligned batch response: {resp}")
        return [self._record(s, a) for s, a in zip(states, actions)]

    def __call__(self, state):
        return self.query(state)

    def close(self):
        self._channel.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def external_policy(endpoint, factorization, n_actions=None, config=None):
    """Connect to ``exec:CMD`` (subprocess stdio) or ``tcp:HOST:PORT``."""
    config = config or ProtocolConfig()
    if isinstance(endpoint, (list, tuple)):
        channel = _SubprocessChannel(list(endpoint))
        name = " ".join(endpoint)
    elif endpoint.startswith("exec:"):
        channel = _SubprocessChannel(shlex.split(endpoint[5:]))
        name = endpoint
    elif endpoint.startswith("tcp:"):
        host, _, port = endpoint[4:].rpartition(":")
        channel = _TcpChannel(host or "127.0.0.1", int(port), config)
        name = endpoint
    else:
        raise ValueError(f"endpoint must be exec:CMD or tcp:HOST:PORT, got {endpoint!r}")
    return ExternalPolicy(channel, factorization, n_actions, config, name=name)
