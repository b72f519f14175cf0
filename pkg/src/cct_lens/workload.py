"""Deterministic synthetic workload generator for an HR portal scenario.

Use cases are encoded as CallChain templates: trees of method frames
matching the portal's three-tier design (JSP/servlet web tier, stateless
session beans behind EJB container stubs and wrappers, DAO classes on
JDBC).  A WorkloadSpec says how many times to run each chain, on how
many threads, and under which LatencyModel; ``simulate`` expands that
into a balanced enter/exit trace.

Randomness is counter-based: every frame's self duration is derived by
hashing (seed, use case, execution index, frame index), so generation
order and host parallelism cannot change the output.  Identical specs
produce byte-identical traces.

``figure8_preset`` pins a 20-user snapshot of this portal whose analysis
reproduces the reference hot-spot table in ``FIGURE8_TABLE`` exactly:
the registration and login flows carry the DAO load, and background
page-view chains plus a one-time container-init chain cover the
remaining rows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from hashlib import blake2b
from typing import Mapping

from .trace import ENTER, EXIT

SERVLET_ARGS = ("javax.servlet.http.HttpServletRequest,"
                "javax.servlet.http.HttpServletResponse")

_JSP = "org.apache.jsp"
_SERVLET = "com.mycompany.hr.servlet"
_PROCESS = "com.mycompany.hr.process"
_DAO = "com.mycompany.hr.dao"
_VO = "com.mycompany.hr.vo"
_STUB = f"{_PROCESS}._EmployeeBeanRemoteRemote_DynamicStub"
_WRAPPER = f"{_PROCESS}._EmployeeBeanRemoteRemoteWrapper"

CANDIDATE_PROFILE = f"{_VO}.CandidateProfile"
EMPLOYEE_CREDENTIALS = f"{_VO}.EmployeeCredentials"

# fully qualified method names used by the chain templates
GET_CONNECTION = f"{_DAO}.BaseDAO.getConnection()"
BASEDAO_INIT = f"{_DAO}.BaseDAO.<init>()"
EMPLOYEEDAO_INIT = f"{_DAO}.EmployeeDAO.<init>()"
DAO_ADD_CANDIDATE_PROFILE = f"{_DAO}.EmployeeDAO.addCandidateProfile({CANDIDATE_PROFILE})"
DAO_ADD_EMPLOYEE_CREDENTIALS = f"{_DAO}.EmployeeDAO.addEmployeeCredentials({EMPLOYEE_CREDENTIALS})"
DAO_AUTHENTICATE_EMPLOYEE = f"{_DAO}.EmployeeDAO.authenticateEmployee({EMPLOYEE_CREDENTIALS})"
DAO_ADD_INTERVIEW_RESULTS = f"{_DAO}.InterviewDAO.addInterviewResults(java.lang.String)"
DAO_VIEW_INTERVIEW_RESULTS = f"{_DAO}.InterviewDAO.viewInterviewResults(java.lang.String)"
DAO_RECRUIT_EMPLOYEE = f"{_DAO}.HRDAO.recruitEmployee(java.lang.String)"

BEAN_ADD_CANDIDATE_PROFILE = f"{_PROCESS}.EmployeeBeanBean.addCandidateProfile({CANDIDATE_PROFILE})"
BEAN_ADD_CREDENTIALS = f"{_PROCESS}.EmployeeBeanBean.addCredentials({EMPLOYEE_CREDENTIALS})"
BEAN_AUTHENTICATE = f"{_PROCESS}.EmployeeBeanBean.authenticate({EMPLOYEE_CREDENTIALS})"
BEAN_ADD_INTERVIEW_RESULTS = f"{_PROCESS}.InterviewResultsBean.addInterviewResults(java.lang.String)"
BEAN_VIEW_INTERVIEW_RESULTS = f"{_PROCESS}.InterviewResultsBean.viewInterviewResults(java.lang.String)"
BEAN_RECRUIT = f"{_PROCESS}.HRProcessBean.recruit(java.lang.String)"

STUB_ADD_CANDIDATE_PROFILE = f"{_STUB}.addCandidateProfile({CANDIDATE_PROFILE})"
STUB_ADD_EMPLOYEE_CREDENTIALS = f"{_STUB}.addEmployeeCredentials({EMPLOYEE_CREDENTIALS})"
STUB_AUTHENTICATE = f"{_STUB}.authenticate({EMPLOYEE_CREDENTIALS})"
STUB_INIT = f"{_STUB}.<init>()"
WRAPPER_ADD_CANDIDATE_PROFILE = f"{_WRAPPER}.addCandidateProfile({CANDIDATE_PROFILE})"
WRAPPER_ADD_EMPLOYEE_CREDENTIALS = f"{_WRAPPER}.addEmployeeCredentials({EMPLOYEE_CREDENTIALS})"
WRAPPER_AUTHENTICATE = f"{_WRAPPER}.authenticate({EMPLOYEE_CREDENTIALS})"
WRAPPER_INIT = f"{_WRAPPER}.<init>()"

CANDIDATE_PROFILE_INIT = f"{CANDIDATE_PROFILE}.<init>()"
EMPLOYEE_CREDENTIALS_INIT = f"{EMPLOYEE_CREDENTIALS}.<init>()"

REGISTER_JSP = f"{_JSP}.Register_jsp._jspService({SERVLET_ARGS})"
LOGIN_JSP = f"{_JSP}.Login_jsp._jspService({SERVLET_ARGS})"
ADDCANDIDATE_JSP = f"{_JSP}.AddCandidate_jsp._jspService({SERVLET_ARGS})"
WELCOME_JSP = f"{_JSP}.Welcome_jsp._jspService({SERVLET_ARGS})"
VIEWPROFILE_JSP = f"{_JSP}.ViewProfile_jsp._jspService({SERVLET_ARGS})"
INTERVIEWINFO_JSP = f"{_JSP}.InterviewInfoPage_jsp._jspService({SERVLET_ARGS})"
RECRUITMENT_JSP = f"{_JSP}.RecruitmentPage_jsp._jspService({SERVLET_ARGS})"
VIEWRESULT_JSP = f"{_JSP}.ViewResult_jsp._jspService({SERVLET_ARGS})"
JSP_LOGINSERVLET_PROCESS_REQUEST = f"{_JSP}.LoginServlet.processRequest({SERVLET_ARGS})"

REGISTRATION_SERVLET_PROCESS_REQUEST = f"{_SERVLET}.RegistrationServlet.processRequest({SERVLET_ARGS})"
LOGINSERVLET_DOPOST = f"{_SERVLET}.LoginServlet.doPost({SERVLET_ARGS})"
LOGINSERVLET_INIT = f"{_SERVLET}.LoginServlet.<init>()"
INTERVIEWRESULT_SERVLET_PROCESS_REQUEST = f"{_SERVLET}.InterviewResultServlet.processRequest({SERVLET_ARGS})"
HRPROCESS_SERVLET_DOGET = f"{_SERVLET}.HRProcessServlet.doGet({SERVLET_ARGS})"
HRPROCESS_SERVLET_INIT = f"{_SERVLET}.HRProcessServlet.<init>()"
# this servlet class is deployed under the process package
HRPROCESS_PROCESS_REQUEST = f"{_PROCESS}.HRProcessServlet.processRequest({SERVLET_ARGS})"


@dataclass(frozen=True)
class Frame:
    """One method call in a chain template, with nested callees."""

    method: str
    children: tuple["Frame", ...] = ()


def frame(method: str, *children: Frame) -> Frame:
    return Frame(method, children)


@dataclass(frozen=True)
class CallChain:
    """A named use-case template: top-level frames executed in order.

    Most chains have a single root frame; the container-init chain runs
    several one-shot constructor frames back to back.
    """

    name: str
    roots: tuple[Frame, ...]

    def frame_count(self) -> int:
        count = 0
        stack = list(self.roots)
        while stack:
            f = stack.pop()
            count += 1
            stack.extend(f.children)
        return count

    def methods(self) -> list[str]:
        """Every method in the template, preorder, duplicates kept."""
        out = []
        stack = list(reversed(self.roots))
        while stack:
            f = stack.pop()
            out.append(f.method)
            stack.extend(reversed(f.children))
        return out


def _register_chain() -> CallChain:
    dao_fresh = frame(EMPLOYEEDAO_INIT, frame(BASEDAO_INIT))
    return CallChain("register", (
        frame(REGISTER_JSP,
              frame(REGISTRATION_SERVLET_PROCESS_REQUEST,
                    frame(CANDIDATE_PROFILE_INIT),
                    frame(STUB_ADD_CANDIDATE_PROFILE,
                          frame(WRAPPER_ADD_CANDIDATE_PROFILE,
                                frame(CANDIDATE_PROFILE_INIT),
                                frame(BEAN_ADD_CANDIDATE_PROFILE,
                                      dao_fresh,
                                      frame(DAO_ADD_CANDIDATE_PROFILE,
                                            frame(GET_CONNECTION))))),
                    frame(EMPLOYEE_CREDENTIALS_INIT),
                    frame(STUB_ADD_EMPLOYEE_CREDENTIALS,
                          frame(WRAPPER_ADD_EMPLOYEE_CREDENTIALS,
                                frame(EMPLOYEE_CREDENTIALS_INIT),
                                frame(BEAN_ADD_CREDENTIALS,
                                      dao_fresh,
                                      frame(DAO_ADD_EMPLOYEE_CREDENTIALS,
                                            frame(GET_CONNECTION))))))),
    ))


def _login_chain() -> CallChain:
    return CallChain("login", (
        frame(LOGIN_JSP,
              frame(LOGINSERVLET_DOPOST,
                    frame(JSP_LOGINSERVLET_PROCESS_REQUEST,
                          frame(EMPLOYEE_CREDENTIALS_INIT),
                          frame(STUB_AUTHENTICATE,
                                frame(WRAPPER_AUTHENTICATE,
                                      frame(EMPLOYEE_CREDENTIALS_INIT),
                                      frame(BEAN_AUTHENTICATE,
                                            frame(EMPLOYEEDAO_INIT, frame(BASEDAO_INIT)),
                                            frame(DAO_AUTHENTICATE_EMPLOYEE,
                                                  frame(GET_CONNECTION)))))))),
    ))


def _add_interview_result_chain() -> CallChain:
    return CallChain("add_interview_result", (
        frame(INTERVIEWINFO_JSP,
              frame(INTERVIEWRESULT_SERVLET_PROCESS_REQUEST,
                    frame(BEAN_ADD_INTERVIEW_RESULTS,
                          frame(DAO_ADD_INTERVIEW_RESULTS,
                                frame(GET_CONNECTION))))),
    ))


def _recruit_chain() -> CallChain:
    return CallChain("recruit", (
        frame(RECRUITMENT_JSP,
              frame(HRPROCESS_SERVLET_DOGET,
                    frame(HRPROCESS_PROCESS_REQUEST,
                          frame(BEAN_RECRUIT,
                                frame(DAO_RECRUIT_EMPLOYEE,
                                      frame(GET_CONNECTION)))))),
    ))


def _view_result_chain() -> CallChain:
    return CallChain("view_result", (
        frame(VIEWRESULT_JSP,
              frame(BEAN_VIEW_INTERVIEW_RESULTS,
                    frame(DAO_VIEW_INTERVIEW_RESULTS,
                          frame(GET_CONNECTION)))),
    ))


def hr_scenarios() -> dict[str, CallChain]:
    """The five portal use cases as chain templates."""
    chains = (
        _register_chain(),
        _login_chain(),
        _add_interview_result_chain(),
        _recruit_chain(),
        _view_result_chain(),
    )
    return {c.name: c for c in chains}


def _background_chains() -> dict[str, CallChain]:
    # standalone page views and one-shot class construction; these carry
    # the hot-spot rows that no use-case flow explains
    chains = (
        CallChain("login_page", (frame(LOGIN_JSP),)),
        CallChain("addcandidate_page", (frame(ADDCANDIDATE_JSP),)),
        CallChain("hrprocess_page", (
            frame(HRPROCESS_SERVLET_DOGET, frame(HRPROCESS_PROCESS_REQUEST)),
        )),
        CallChain("welcome_page", (frame(WELCOME_JSP),)),
        CallChain("viewprofile_page", (frame(VIEWPROFILE_JSP),)),
        CallChain("container_init", (
            frame(LOGINSERVLET_INIT),
            frame(HRPROCESS_SERVLET_INIT),
            frame(STUB_INIT),
            frame(WRAPPER_INIT),
            frame(WRAPPER_INIT),
        )),
    )
    return {c.name: c for c in chains}


def standard_chains() -> dict[str, CallChain]:
    """All chains known to specs and presets: use cases plus background."""
    chains = hr_scenarios()
    chains.update(_background_chains())
    return chains


@dataclass(frozen=True)
class LatencyModel:
    """Per-method self durations with optional seeded jitter.

    ``jitter`` is a half-width fraction in [0, 1): each frame's duration
    is its base scaled by a factor drawn uniformly from
    [1 - jitter, 1 + jitter).  The draw hashes the frame's identity, so
    it is independent of generation order.
    """

    base_ns: Mapping[str, int]
    default_base_ns: int = 1_000_000
    jitter: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.jitter < 1.0:
            raise ValueError(f"jitter must be in [0, 1), got {self.jitter}")
        if self.default_base_ns < 0:
            raise ValueError("default_base_ns must be >= 0")
        for method, base in self.base_ns.items():
            if base < 0:
                raise ValueError(f"negative base duration for {method}")

    def base_for(self, method: str) -> int:
        return self.base_ns.get(method, self.default_base_ns)

    def self_duration_ns(self, method: str, seed: int, use_case: str,
                         execution_index: int, frame_index: int) -> int:
        base = self.base_for(method)
        if self.jitter == 0.0 or base == 0:
            return base
        key = f"{seed}|{use_case}|{execution_index}|{frame_index}".encode()
        word = int.from_bytes(blake2b(key, digest_size=8).digest(), "big")
        unit = word / 2**64  # uniform in [0, 1)
        factor = 1.0 + self.jitter * (2.0 * unit - 1.0)
        return max(0, round(base * factor))


@dataclass
class WorkloadSpec:
    """Declarative scenario: which chains run how often, on which threads."""

    executions: dict[str, int]
    seed: int = 0
    latency: LatencyModel = field(default_factory=lambda: LatencyModel(base_ns={}))
    thread_count: int = 1
    chains: dict[str, CallChain] = field(default_factory=standard_chains)

    def validate(self) -> None:
        if self.thread_count < 1:
            raise ValueError(f"thread_count must be >= 1, got {self.thread_count}")
        for name, count in self.executions.items():
            if name not in self.chains:
                known = ", ".join(sorted(self.chains))
                raise ValueError(f"unknown use case {name!r} (known: {known})")
            if count < 0:
                raise ValueError(f"negative execution count for {name!r}: {count}")


# Reference hot-spot table for the 20-user portal snapshot, top to
# bottom: (method, self time in ms, invocations).  figure8_preset() is
# calibrated so a jitter-0 analysis reproduces every row at display
# precision and every invocation count exactly.
FIGURE8_TABLE: tuple[tuple[str, float, int], ...] = (
    (GET_CONNECTION, 1267.0, 50),
    (DAO_ADD_CANDIDATE_PROFILE, 946.0, 20),
    (DAO_ADD_EMPLOYEE_CREDENTIALS, 624.0, 20),
    (DAO_AUTHENTICATE_EMPLOYEE, 85.8, 10),
    (LOGIN_JSP, 54.6, 20),
    (STUB_ADD_CANDIDATE_PROFILE, 30.8, 20),
    (STUB_AUTHENTICATE, 15.2, 10),
    (HRPROCESS_PROCESS_REQUEST, 13.3, 22),
    (STUB_ADD_EMPLOYEE_CREDENTIALS, 8.7, 20),
    (ADDCANDIDATE_JSP, 5.47, 23),
    (JSP_LOGINSERVLET_PROCESS_REQUEST, 3.21, 10),
    (WELCOME_JSP, 1.86, 6),
    (BEAN_AUTHENTICATE, 1.17, 10),
    (VIEWPROFILE_JSP, 0.856, 3),
    (HRPROCESS_SERVLET_DOGET, 0.368, 22),
    (BASEDAO_INIT, 0.235, 50),
    (EMPLOYEEDAO_INIT, 0.195, 50),
    (BEAN_ADD_CREDENTIALS, 0.195, 20),
    (LOGINSERVLET_DOPOST, 0.177, 10),
    (BEAN_ADD_CANDIDATE_PROFILE, 0.175, 20),
    (EMPLOYEE_CREDENTIALS_INIT, 0.117, 60),
    (WRAPPER_ADD_CANDIDATE_PROFILE, 0.114, 20),
    (WRAPPER_ADD_EMPLOYEE_CREDENTIALS, 0.109, 20),
    (CANDIDATE_PROFILE_INIT, 0.104, 40),
    (WRAPPER_AUTHENTICATE, 0.068, 10),
    (WRAPPER_INIT, 0.066, 2),
    (LOGINSERVLET_INIT, 0.033, 1),
    (STUB_INIT, 0.028, 1),
    (HRPROCESS_SERVLET_INIT, 0.026, 1),
)

# per-invocation base durations derived from the table rows
_CALIBRATED_BASE_NS: dict[str, int] = {
    method: round(self_ms * 1e6 / invocations)
    for method, self_ms, invocations in FIGURE8_TABLE
}

# executions per chain behind the 20-user snapshot; the register and
# login flows account for all DAO/bean/stub traffic, the rest is page
# views plus one-time class construction
_FIGURE8_MIX: dict[str, int] = {
    "register": 20,
    "login": 10,
    "login_page": 10,
    "addcandidate_page": 23,
    "hrprocess_page": 22,
    "welcome_page": 6,
    "viewprofile_page": 3,
    "container_init": 1,
}


def calibrated_latency(jitter: float = 0.0) -> LatencyModel:
    """The per-method durations behind FIGURE8_TABLE.

    Methods outside the table (the registration page and servlet, which
    the reference table does not list) default to zero self time so they
    never perturb the calibrated totals.
    """
    return LatencyModel(base_ns=dict(_CALIBRATED_BASE_NS), default_base_ns=0,
                        jitter=jitter)


def figure8_preset() -> WorkloadSpec:
    """The 20-user snapshot workload; analysis reproduces FIGURE8_TABLE."""
    return WorkloadSpec(
        executions=dict(_FIGURE8_MIX),
        seed=20,
        latency=calibrated_latency(),
        thread_count=4,
    )


def load_preset(
    user_count: int,
    jitter: float = 0.0,
    seed: int = 11,
    repeats: int = 8,
) -> WorkloadSpec:
    """A load-scaling workload: per-call latency independent of user count.

    Each user registers ``repeats`` candidates and logs in ``repeats`` times
    over the capture window; only the volume grows with ``user_count``, never
    the per-call durations, so per-method averages are load-invariant up to
    jitter.  The repeat factor keeps averages stable even at one user: with
    eight samples a 10% jitter moves a per-method mean by a few percent at
    most, so cross-load ratios stay well inside [1 - jitter, 1 + jitter].
    """
    if user_count < 1:
        raise ValueError(f"user_count must be >= 1, got {user_count}")
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    volume = user_count * repeats
    return WorkloadSpec(
        executions={"register": volume, "login": volume},
        seed=seed,
        latency=calibrated_latency(jitter),
        thread_count=min(user_count, 4),
    )


PRESETS = {
    "figure8": figure8_preset,
}


def simulate(spec: WorkloadSpec) -> str:
    """Expand a workload spec into canonical trace text.

    Use cases expand in sorted-name order, so the output depends only on
    spec content, never on mapping insertion order.  Executions are
    assigned round-robin to tids 1..thread_count; each tid's executions
    run back to back on its own timeline, so per-tid frames never
    overlap.  Events are ordered globally by (ts, tid, per-tid order).
    Pure function of the spec: byte-identical output for identical specs.
    """
    spec.validate()
    latency, seed = spec.latency, spec.seed
    # (ts, tid, per-tid sequence, rendered line)
    rows: list[tuple[int, int, int, str]] = []
    clocks: dict[int, int] = {}
    seqs: dict[int, int] = {}
    global_index = 0
    for use_case in sorted(spec.executions):
        count = spec.executions[use_case]
        chain = spec.chains[use_case]
        for execution_index in range(count):
            tid = 1 + (global_index % spec.thread_count)
            global_index += 1
            seq = seqs.get(tid, 0)
            t = clocks.get(tid, 0)
            frame_index = 0

            def emit(fr: Frame, start: int) -> int:
                nonlocal seq, frame_index
                duration = latency.self_duration_ns(
                    fr.method, seed, use_case, execution_index, frame_index)
                frame_index += 1
                rows.append((start, tid, seq, f"{start}\t{tid}\t{ENTER}\t{fr.method}"))
                seq += 1
                end = start + duration
                for child in fr.children:
                    end = emit(child, end)
                rows.append((end, tid, seq, f"{end}\t{tid}\t{EXIT}\t{fr.method}"))
                seq += 1
                return end

            for root in chain.roots:
                t = emit(root, t)
            clocks[tid] = t
            seqs[tid] = seq
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    mix = " ".join(f"{name}={spec.executions[name]}" for name in sorted(spec.executions))
    header = [
        "# synthetic enter/exit trace",
        f"# workload: {mix if mix else '(empty)'}",
        f"# seed={seed} jitter={latency.jitter} threads={spec.thread_count} events={len(rows)}",
    ]
    return "\n".join(header + [r[3] for r in rows]) + "\n"


def dump_workload_spec(spec: WorkloadSpec) -> str:
    """Serialize a spec (minus chain templates, which are built in)."""
    doc = {
        "executions": dict(spec.executions),
        "seed": spec.seed,
        "thread_count": spec.thread_count,
        "jitter": spec.latency.jitter,
        "default_base_ns": spec.latency.default_base_ns,
        "base_ns": dict(spec.latency.base_ns),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_workload_spec(text: str) -> WorkloadSpec:
    """Parse a spec document; chain templates come from standard_chains().

    Expected keys: executions (required), seed, thread_count, jitter,
    default_base_ns, base_ns.  Unknown keys are rejected to catch typos.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"bad workload spec: {exc}") from None
    if not isinstance(doc, dict):
        raise ValueError("workload spec must be a JSON object")
    known = {"executions", "seed", "thread_count", "jitter", "default_base_ns", "base_ns"}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown workload spec keys: {', '.join(sorted(unknown))}")
    executions = doc.get("executions")
    if not isinstance(executions, dict):
        raise ValueError("workload spec needs an 'executions' object")
    for name, count in executions.items():
        if not isinstance(count, int) or isinstance(count, bool):
            raise ValueError(f"execution count for {name!r} must be an integer")
    base_ns = doc.get("base_ns", {})
    if not isinstance(base_ns, dict):
        raise ValueError("'base_ns' must be an object")
    latency = LatencyModel(
        base_ns={m: int(v) for m, v in base_ns.items()},
        default_base_ns=int(doc.get("default_base_ns", 1_000_000)),
        jitter=float(doc.get("jitter", 0.0)),
    )
    spec = WorkloadSpec(
        executions={n: c for n, c in executions.items()},
        seed=int(doc.get("seed", 0)),
        latency=latency,
        thread_count=int(doc.get("thread_count", 1)),
    )
    spec.validate()
    return spec


def load_workload_spec_file(path) -> WorkloadSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return load_workload_spec(fh.read())
