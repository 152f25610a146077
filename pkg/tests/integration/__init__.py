"""
Integration tests for the NXT agent harness.

Test Categories:
- Scenarios: shipped agent programs against simulated bricks in lock-step
- Transport: websocket brick link and free-running threads
"""
