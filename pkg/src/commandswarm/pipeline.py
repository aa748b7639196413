"""Command pipeline: normalize, safety-gate, prompt, generate, validate, run.

External services (LLM, translator, safety classifier) are reached through
one chat-completion-style HTTP contract; deterministic mocks implement the
same interface so the whole pipeline runs offline. A trace is persisted for
every command, accepted or not, and the safety layer fails closed.
"""

from __future__ import annotations

import json
import os
import re
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import httpx

from . import swarm_sim
from .bt_model import (
    COLOR_VALUES,
    NodeWhitelist,
    ValidationReport,
    default_whitelist,
    parse_document,
    serialize_tree,
)
from .bt_runtime import RuntimeFault, TickStatus, TreeExecutor
from .datagen import DEFAULT_ENTRIES, TemplateBank, _build, _fill


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message


# --- endpoint clients --------------------------------------------------------

@dataclass
class ModelEndpointConfig:
    base_url: str
    model: str = "default"
    max_tokens: int = 512
    temperature: float = 0.0
    timeout_ms: int = 10000
    retries: int = 0

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelEndpointConfig":
        return cls(
            base_url=obj["base_url"],
            model=obj.get("model", "default"),
            max_tokens=int(obj.get("max_tokens", 512)),
            temperature=float(obj.get("temperature", 0.0)),
            timeout_ms=int(obj.get("timeout_ms", 10000)),
            retries=int(obj.get("retries", 0)),
        )


class ChatEndpoint:
    """HTTP client for the uniform chat-completion contract.

    Request: {"model", "messages": [{"role", "content"}], "max_tokens",
    "temperature"}; response: {"text": ...}. Retries transport errors only.
    """

    def __init__(self, config: ModelEndpointConfig, stage: str):
        self.config = config
        self.stage = stage

    def complete(self, content: str) -> str:
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": content}],
            "max_tokens": self.config.max_tokens,
            "temperature": self.config.temperature,
        }
        attempts = self.config.retries + 1
        last_error = None
        for _ in range(attempts):
            try:
                response = httpx.post(
                    self.config.base_url,
                    json=payload,
                    timeout=self.config.timeout_ms / 1000.0,
                )
                if response.status_code // 100 != 2:
                    raise StageError(
                        self.stage, f"endpoint returned HTTP {response.status_code}"
                    )
                return str(response.json()["text"])
            except httpx.HTTPError as exc:
                last_error = exc
        raise StageError(
            self.stage, f"endpoint unreachable after {attempts} attempts: {last_error}"
        )


class ScriptedMockEndpoint:
    """Deterministic test double: cycles through a fixed list of outputs."""

    def __init__(self, outputs: list[str]):
        if not outputs:
            raise ValueError("scripted mock needs at least one output")
        self.outputs = list(outputs)
        self.calls = 0

    def complete(self, content: str) -> str:
        out = self.outputs[self.calls % len(self.outputs)]
        self.calls += 1
        return out


_USER_COMMAND_RE = re.compile(r"^USER COMMAND:\s*(.*)$", re.MULTILINE)


class TemplateMockEndpoint:
    """Offline stand-in for the LLM: keyword-matches the user command onto
    the synthetic template bank and emits the corresponding tree."""

    def complete(self, content: str) -> str:
        match = _USER_COMMAND_RE.search(content)
        command = (match.group(1) if match else content).lower()
        entry_name = self._match(command)
        if entry_name is None:
            return "Sorry, I do not know a behavior tree for that command."
        entry = next(e for e in DEFAULT_ENTRIES if e.name == entry_name)
        color = next((c for c in COLOR_VALUES if c in command), "green")
        values = {k: (color if k == "color" else v[0]) for k, v in entry.slots.items()}
        from .bt_model import make_tree

        return serialize_tree(make_tree(_build(_fill(entry.tree_spec, values))))

    @staticmethod
    def _match(command: str) -> Optional[str]:
        if "line" in command:
            return "form_line"
        if "obstacle" in command or "avoid" in command:
            return "avoid_and_signal"
        if "freeze" in command or "halt" in command or "stop" in command:
            return "freeze_on_target"
        if "align" in command or "synchron" in command or "same direction" in command:
            return "goal_align" if "goal" in command else "align"
        if "goal" in command or "target" in command or "search" in command:
            return "search_and_signal"
        if "wander" in command or "roam" in command or "explore" in command or "patrol" in command:
            return "wander"
        if "color" in command or any(c in command for c in COLOR_VALUES):
            return "change_color"
        return None


def build_endpoint(config: Optional[ModelEndpointConfig], stage: str):
    if config is None:
        return None
    if config.base_url == "mock:template":
        return TemplateMockEndpoint()
    if config.base_url.startswith("mock:script:"):
        return ScriptedMockEndpoint(json.loads(config.base_url[len("mock:script:"):]))
    return ChatEndpoint(config, stage)


# --- pipeline configuration --------------------------------------------------

DEFAULT_BLOCKLIST = (
    "attack", "weapon", "kill", "hurt", "harm", "injure", "destroy",
    "crash into", "ram", "collide with", "explode", "bomb", "strike",
    "crowd", "person", "people", "pedestrian",
)

_STOPWORDS = {
    "a", "an", "and", "as", "at", "be", "by", "do", "for", "from", "how",
    "if", "in", "into", "is", "it", "its", "of", "on", "or", "out", "over",
    "please", "that", "the", "their", "them", "then", "this", "to", "until",
    "up", "what", "when", "where", "which", "who", "why", "will", "with",
    "you", "your",
}

_EXTRA_DOMAIN_WORDS = {
    "move", "go", "head", "navigate", "proceed", "drive", "steer", "turn",
    "drone", "drones", "agent", "agents", "robot", "robots", "swarm",
    "center", "middle", "formation", "stop", "halt", "search", "signal",
    "explore", "patrol", "roam", "arena", "area", "detect", "spot", "sense",
    "notice", "dodge", "evade", "locate", "hunt", "seek", "reach", "arrive",
    "together", "heading", "headings", "direction",
} | set(COLOR_VALUES)


def _camel_words(name: str) -> list[str]:
    return [w.lower() for w in re.findall(r"[A-Z][a-z]*", name)]


def domain_vocabulary(whitelist: Optional[NodeWhitelist] = None) -> frozenset[str]:
    whitelist = whitelist or default_whitelist()
    words = set(_EXTRA_DOMAIN_WORDS)
    for name in whitelist.names():
        words.update(_camel_words(name))
    return frozenset(words)


@dataclass
class PipelineConfig:
    llm: ModelEndpointConfig = field(
        default_factory=lambda: ModelEndpointConfig(base_url="mock:template")
    )
    translator: Optional[ModelEndpointConfig] = None
    safety: Optional[ModelEndpointConfig] = None
    blocklist: tuple[str, ...] = DEFAULT_BLOCKLIST
    preempt: bool = True  # new command preempts a running tree (vs queue-reject)
    max_ticks: int = 2000
    audit_dir: Optional[str] = None

    @classmethod
    def from_dict(cls, obj: dict) -> "PipelineConfig":
        def endpoint(key):
            sub = obj.get(key)
            if sub is None:
                return None
            cfg = ModelEndpointConfig.from_dict(sub)
            env = os.environ.get(f"SWARMCOMMAND_{key.upper()}_BASE_URL")
            if env:
                cfg.base_url = env
            return cfg

        blocklist = DEFAULT_BLOCKLIST
        path = obj.get("blocklist_path")
        if path:
            with open(path, encoding="utf-8") as fh:
                blocklist = tuple(
                    line.strip() for line in fh if line.strip() and not line.startswith("#")
                )
        llm = endpoint("llm")
        return cls(
            llm=llm if llm is not None else ModelEndpointConfig(base_url="mock:template"),
            translator=endpoint("translator"),
            safety=endpoint("safety"),
            blocklist=blocklist,
            preempt=bool(obj.get("preempt", True)),
            max_ticks=int(obj.get("max_ticks", 2000)),
            audit_dir=obj.get("audit_dir"),
        )

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


# --- pipeline data types -----------------------------------------------------

@dataclass
class CommandInput:
    session_id: str
    raw_text: Optional[str] = None
    modality: str = "text"  # "text" | "audio-reference"
    language_hint: Optional[str] = None
    timestamp: float = field(default_factory=time.time)

    def __post_init__(self):
        if self.modality == "text" and self.raw_text is None:
            raise ValueError("text modality requires raw_text")

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "modality": self.modality,
            "raw_text": self.raw_text,
            "language_hint": self.language_hint,
            "timestamp": self.timestamp,
        }


@dataclass
class SafetyVerdict:
    decision: str  # "Allow" | "Reject"
    reason: str
    source: str  # "external-classifier" | "rule-fallback"

    def __post_init__(self):
        if self.decision == "Reject" and not self.reason:
            raise ValueError("Reject verdicts must carry a reason")

    def to_dict(self) -> dict:
        return {"decision": self.decision, "reason": self.reason, "source": self.source}


@dataclass
class PromptSpec:
    system_instruction: str
    allowed_nodes: str
    format_skeleton: str
    shots: int
    examples: list[tuple[str, str]]
    user_command: str

    def to_dict(self) -> dict:
        return {
            "system_instruction": self.system_instruction,
            "allowed_nodes": self.allowed_nodes,
            "format_skeleton": self.format_skeleton,
            "shots": self.shots,
            "examples": [{"instruction": i, "tree_xml": t} for i, t in self.examples],
            "user_command": self.user_command,
        }


class ExecutionStatus:
    NOT_EXECUTED = "NotExecuted"
    RUNNING = "Running"
    SUCCEEDED = "Succeeded"
    FAILED = "Failed"
    STOPPED = "Stopped"
    TIMEOUT = "Timeout"


@dataclass
class PipelineTrace:
    trace_id: str
    command_input: CommandInput
    normalized_text: Optional[str] = None
    safety_verdict: Optional[SafetyVerdict] = None
    prompt_spec: Optional[PromptSpec] = None
    raw_model_output: Optional[str] = None
    validation_report: Optional[ValidationReport] = None
    execution_status: str = ExecutionStatus.NOT_EXECUTED
    latencies_ms: dict[str, float] = field(default_factory=dict)
    stage_error: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "trace_id": self.trace_id,
            "command_input": self.command_input.to_dict(),
            "normalized_text": self.normalized_text,
            "safety_verdict": self.safety_verdict.to_dict() if self.safety_verdict else None,
            "prompt_spec": self.prompt_spec.to_dict() if self.prompt_spec else None,
            "raw_model_output": self.raw_model_output,
            "validation_report": (
                self.validation_report.to_dict() if self.validation_report else None
            ),
            "execution_status": self.execution_status,
            "latencies_ms": self.latencies_ms,
            "stage_error": self.stage_error,
        }


# --- prompt construction -----------------------------------------------------

FORMAT_SKELETON = (
    "<root> ... <BehaviorTree> ... </BehaviorTree>\n"
    "                 <TreeNodesModel> ... </TreeNodesModel> </root>"
)

SYSTEM_INSTRUCTION = "Generate only a valid XML behavior tree."


def _example_bank() -> list[tuple[str, str]]:
    bank = []
    for scenario_id in (1, 5):
        scenario = swarm_sim.load_scenario(scenario_id)
        bank.append((scenario.description, serialize_tree(scenario.reference_tree)))
    return bank


EXAMPLE_BANK = _example_bank()


def render_allowed_nodes(whitelist: NodeWhitelist) -> str:
    lines = ["ALLOWED ACTIONS:"]
    for spec in whitelist.actions.values():
        params = ""
        if spec.required_params:
            params = " (" + ", ".join(
                f"{p.key}: {'|'.join(p.allowed_values) if p.allowed_values else 'free text'}"
                for p in spec.required_params
            ) + ")"
        lines.append(f"- {spec.name}{params}")
    lines.append("ALLOWED CONDITIONS:")
    for spec in whitelist.conditions.values():
        lines.append(f"- {spec.name}")
    return "\n".join(lines)


def build_prompt(command: str, shots: int,
                 whitelist: Optional[NodeWhitelist] = None) -> tuple[PromptSpec, str]:
    if shots not in (0, 1, 2):
        raise ValueError(f"shots must be 0, 1, or 2, got {shots!r}")
    whitelist = whitelist or default_whitelist()
    allowed = render_allowed_nodes(whitelist)
    examples = EXAMPLE_BANK[:shots]
    spec = PromptSpec(
        system_instruction=SYSTEM_INSTRUCTION,
        allowed_nodes=allowed,
        format_skeleton=FORMAT_SKELETON,
        shots=shots,
        examples=examples,
        user_command=command,
    )
    parts = [
        f"SYSTEM: {SYSTEM_INSTRUCTION}",
        "INSTRUCTIONS: Use only the listed actions and conditions.",
        allowed,
        f"REQUIRED FORMAT: {FORMAT_SKELETON}",
    ]
    for i, (instruction, tree_xml) in enumerate(examples, start=1):
        parts.append(f"EXAMPLE {i} COMMAND: {instruction}")
        parts.append(f"EXAMPLE {i} TREE:\n{tree_xml}")
    parts.append(f"USER COMMAND: {command}")
    parts.append("RESPONSE: XML only.")
    return spec, "\n".join(parts)


# --- pipeline stages ---------------------------------------------------------

class Pipeline:
    def __init__(self, config: Optional[PipelineConfig] = None,
                 whitelist: Optional[NodeWhitelist] = None):
        self.config = config or PipelineConfig()
        self.whitelist = whitelist or default_whitelist()
        self.llm = build_endpoint(self.config.llm, "generate")
        self.translator = build_endpoint(self.config.translator, "translate")
        self.safety = build_endpoint(self.config.safety, "safety")
        self._vocabulary = domain_vocabulary(self.whitelist)

    def normalize_input(self, command: CommandInput) -> str:
        is_english_text = (
            command.modality == "text"
            and (command.language_hint is None or command.language_hint.startswith("en"))
        )
        if is_english_text:
            return (command.raw_text or "").strip()
        if self.translator is None:
            raise StageError("translate", "translation unavailable: no endpoint configured")
        payload = command.raw_text or ""
        return self.translator.complete(payload).strip()

    def check_safety(self, text: str) -> SafetyVerdict:
        if self.safety is not None:
            try:
                answer = self.safety.complete(text).strip().lower()
            except StageError:
                # Fail closed: an unreachable classifier rejects everything.
                return SafetyVerdict("Reject", "safety service unavailable",
                                     "external-classifier")
            if answer.startswith("safe") or answer.startswith("allow"):
                return SafetyVerdict("Allow", "", "external-classifier")
            return SafetyVerdict("Reject", f"classifier verdict: {answer}",
                                 "external-classifier")

        lowered = text.lower()
        for term in self.config.blocklist:
            if re.search(rf"\b{re.escape(term)}\b", lowered):
                return SafetyVerdict("Reject", f"blocklisted term: {term!r}",
                                     "rule-fallback")
        content_words = {
            w for w in re.findall(r"[a-z]+", lowered) if w not in _STOPWORDS
        }
        if not content_words & self._vocabulary:
            return SafetyVerdict(
                "Reject", "command is outside the swarm-behavior domain", "rule-fallback"
            )
        return SafetyVerdict("Allow", "", "rule-fallback")

    def generate_tree(self, rendered_prompt: str) -> str:
        if self.llm is None:
            raise StageError("generate", "no LLM endpoint configured")
        return self.llm.complete(rendered_prompt)


# --- session -----------------------------------------------------------------

class Session:
    """One operator session: a pipeline, a world, and at most one executor.

    Commands are processed strictly sequentially (callers must serialize);
    by default a new command preempts a running tree.
    """

    def __init__(self, session_id: str, scenario_id: int = 1, seed: int = 42,
                 config: Optional[PipelineConfig] = None,
                 on_stage: Optional[Callable[[str, dict], None]] = None):
        self.session_id = session_id
        self.scenario_id = scenario_id
        self.seed = seed
        self.scenario = swarm_sim.load_scenario(scenario_id)
        self.world = self.scenario.build_world(seed)
        self.pipeline = Pipeline(config)
        self.executor: Optional[TreeExecutor] = None
        self.traces: list[PipelineTrace] = []
        self.on_stage = on_stage
        self.created_at = time.time()
        self.updated_at = self.created_at
        self._ticks_this_run = 0
        self._audit_path: Optional[Path] = None
        if self.pipeline.config.audit_dir:
            audit_dir = Path(self.pipeline.config.audit_dir)
            audit_dir.mkdir(parents=True, exist_ok=True)
            self._audit_path = audit_dir / f"session-{session_id}.jsonl"

    # -- audit ----------------------------------------------------------------

    def _persist(self, trace: PipelineTrace) -> None:
        if self._audit_path is not None:
            with open(self._audit_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(trace.to_dict()) + "\n")

    def _emit(self, stage: str, payload: dict) -> None:
        if self.on_stage is not None:
            self.on_stage(stage, payload)

    # -- command handling -----------------------------------------------------

    def handle_command(self, command: CommandInput, shots: int = 0) -> PipelineTrace:
        trace = PipelineTrace(trace_id=str(uuid.uuid4()), command_input=command)
        self.traces.append(trace)
        self.updated_at = time.time()

        def timed(stage: str, fn):
            start = time.perf_counter()
            try:
                return fn()
            finally:
                trace.latencies_ms[stage] = (time.perf_counter() - start) * 1000.0

        try:
            trace.normalized_text = timed(
                "translate", lambda: self.pipeline.normalize_input(command)
            )
            self._emit("translation", {"normalized_text": trace.normalized_text})

            trace.safety_verdict = timed(
                "safety", lambda: self.pipeline.check_safety(trace.normalized_text)
            )
            self._emit("safety", trace.safety_verdict.to_dict())
            if trace.safety_verdict.decision == "Reject":
                self._persist(trace)
                return trace

            spec, rendered = timed(
                "prompt",
                lambda: build_prompt(trace.normalized_text, shots, self.pipeline.whitelist),
            )
            trace.prompt_spec = spec
            self._emit("prompt", {"shots": shots})

            trace.raw_model_output = timed(
                "generate", lambda: self.pipeline.generate_tree(rendered)
            )
            self._emit("raw_output", {"raw_model_output": trace.raw_model_output})

            trace.validation_report = timed(
                "validate",
                lambda: parse_document(trace.raw_model_output, self.pipeline.whitelist),
            )
            self._emit("validation", trace.validation_report.to_dict())
            if not trace.validation_report.accepted:
                self._persist(trace)
                return trace

            if self.executor is not None and not self.pipeline.config.preempt:
                trace.stage_error = {
                    "stage": "execute",
                    "message": "a tree is already running and preemption is disabled",
                }
                self._persist(trace)
                return trace

            self.executor = swarm_sim.make_executor(trace.validation_report.tree)
            self._ticks_this_run = 0
            trace.execution_status = ExecutionStatus.RUNNING
            self._emit("execution", {"execution_status": trace.execution_status})
        except StageError as exc:
            trace.stage_error = {"stage": exc.stage, "message": exc.message}
            self._emit("error", trace.stage_error)
        self._persist(trace)
        return trace

    # -- execution loop -------------------------------------------------------

    def step(self) -> Optional[TickStatus]:
        """Advance the simulation one tick; resolves execution status."""
        if self.executor is None:
            swarm_sim.step(self.world, None)
            return None
        try:
            status = swarm_sim.step(self.world, self.executor)
        except RuntimeFault as exc:
            self._finish(ExecutionStatus.FAILED, error=str(exc))
            return TickStatus.FAILURE
        self._ticks_this_run += 1
        if status is TickStatus.SUCCESS:
            self._finish(ExecutionStatus.SUCCEEDED)
        elif status is TickStatus.FAILURE:
            self._finish(ExecutionStatus.FAILED)
        elif self._ticks_this_run >= self.pipeline.config.max_ticks:
            self._finish(ExecutionStatus.TIMEOUT)
        return status

    def run_until_resolved(self, max_ticks: Optional[int] = None) -> str:
        budget = max_ticks if max_ticks is not None else self.pipeline.config.max_ticks
        for _ in range(budget):
            if self.executor is None:
                break
            self.step()
        return self.execution_status

    def _finish(self, status: str, error: Optional[str] = None) -> None:
        self.executor = None
        if self.traces:
            trace = self.traces[-1]
            trace.execution_status = status
            if error:
                trace.stage_error = {"stage": "execute", "message": error}
            self._persist(trace)
        self._emit("execution", {"execution_status": status})

    def stop(self) -> None:
        """Emergency stop: halt the executor and freeze all agents."""
        had_executor = self.executor is not None
        self.executor = None
        swarm_sim.freeze_movement(self.world)
        if had_executor and self.traces:
            trace = self.traces[-1]
            trace.execution_status = ExecutionStatus.STOPPED
            self._persist(trace)
        self._emit("execution", {"execution_status": ExecutionStatus.STOPPED})

    @property
    def execution_status(self) -> str:
        return self.traces[-1].execution_status if self.traces else ExecutionStatus.NOT_EXECUTED
