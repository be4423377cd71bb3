#!/usr/bin/env python3
"""Regenerate the checked-in test fixtures against the local toolchain.

Produces, under tests/fixtures/:
  gateway/            replay responses for generator, validator judge, actor,
                      and semantic judge prompts used by the tests
  eval_dataset.jsonl  four verified records with real compiler stderr baked in
  eval_patches.json   the actor patch each record receives during replay
  golden/             twenty snippets with pinned compile statuses

Rerun after a toolchain change; diagnostic wording is part of the fixtures.
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from cxxrepair.compile_harness import CompilerConfig, CompileStatus, compile_source
from cxxrepair.corpus import Dataset, DatasetRecord, DifficultyLevel, Provenance, write_dataset
from cxxrepair.forge import record_id_for, ErrorTarget
from cxxrepair.gateway import FixtureStore, ModelRole, fixture_key, load_role_template, render_prompt

FIXTURES = REPO / "tests" / "fixtures"
GATEWAY_DIR = FIXTURES / "gateway"
GOLDEN_DIR = FIXTURES / "golden"

COMPILER = CompilerConfig()


def fence(code: str) -> str:
    return f"```cpp\n{code}\n```"


def compile_or_die(source: str, expect: CompileStatus) -> str:
    outcome = compile_source(source, COMPILER)
    if outcome.status is not expect:
        raise SystemExit(
            f"snippet expected {expect.value} but got {outcome.status.value}:\n"
            f"{source}\n--- stderr ---\n{outcome.raw_stderr}"
        )
    return outcome.raw_stderr


# --------------------------------------------------------------- scenario A
# Generate-and-verify: six generator variants for one target; three are
# admitted, two fail the judge match, one compiles cleanly.

FORGE_TARGET = ErrorTarget(
    error_type="syntax_error",
    error_number="C2143",
    error_detail="syntax error: missing ';' before '}'",
)

GEN_MATCH_0 = """int main() {
    int a = 1;
    int b = 2
}"""

GEN_MATCH_1 = """struct Point {
    int x;
    int y
};

int main() {
    Point p{1, 2};
    return p.x;
}"""

GEN_MATCH_2 = """#include <string>

int main() {
    std::string name = "widget"
    return 0;
}"""

GEN_OTHER_ERROR_0 = """int main() {
    return undeclared_name;
}"""

GEN_OTHER_ERROR_1 = """int main() {
    int* p = 3.5;
    return 0;
}"""

GEN_CLEAN = """int main() {
    return 0;
}"""

# variant index -> (source, judge reply or None when the snippet compiles)
FORGE_VARIANTS = {
    0: (GEN_MATCH_0, "The diagnostic reports a missing ';' before the closing brace, "
                     "which is the targeted syntax error.\nMATCH"),
    1: (GEN_MATCH_1, "The compiler asks for a ';' at the end of a member declaration; "
                     "that is the targeted missing-semicolon syntax error.\nMATCH"),
    2: (GEN_MATCH_2, "The diagnostic expects a ';' before the next statement, matching "
                     "the targeted syntax error.\nMATCH"),
    3: (GEN_OTHER_ERROR_0, "The diagnostic is an undeclared-identifier error, not a "
                           "missing-semicolon syntax error.\nNO_MATCH"),
    4: (GEN_OTHER_ERROR_1, "The diagnostic is an invalid pointer initialization, not the "
                           "targeted syntax error.\nNO_MATCH"),
    5: (GEN_CLEAN, None),
}


def write_forge_fixtures(store: FixtureStore) -> None:
    generator_template = load_role_template(ModelRole.GENERATOR)
    validator_template = load_role_template(ModelRole.VALIDATOR_JUDGE)
    for variant, (source, judge_reply) in FORGE_VARIANTS.items():
        prompt = render_prompt(
            generator_template,
            {
                "error_type": FORGE_TARGET.error_type,
                "error_number": FORGE_TARGET.error_number,
                "error_detail": FORGE_TARGET.error_detail,
                "variant": str(variant),
            },
        )
        reply = f"Variant {variant}:\n{fence(source)}"
        store.put(fixture_key(ModelRole.GENERATOR, prompt), ModelRole.GENERATOR, prompt, reply)
        if judge_reply is None:
            compile_or_die(source, CompileStatus.PASS)
            continue
        stderr = compile_or_die(source, CompileStatus.FAIL)
        judge_prompt = render_prompt(
            validator_template,
            {
                "error_type": FORGE_TARGET.error_type,
                "error_number": FORGE_TARGET.error_number,
                "error_detail": FORGE_TARGET.error_detail,
                "compiler_output": stderr,
            },
        )
        store.put(
            fixture_key(ModelRole.VALIDATOR_JUDGE, judge_prompt),
            ModelRole.VALIDATOR_JUDGE,
            judge_prompt,
            judge_reply,
        )


# --------------------------------------------------------------- scenario B
# Actor evaluation: four records exercising each verdict category once.
# (buggy source, patch, judge reply, patch must compile?)

EVAL_CASES = [
    {
        "error_type": "syntax_error",
        "error_number": "C2143",
        "error_detail": "syntax error: missing ';'",
        "difficulty": "easy",
        "buggy": """int main() {
    int value = 41
    return value;
}""",
        "patch": """int main() {
    int value = 41;
    return value;
}""",
        "patch_status": CompileStatus.PASS,
        "judge": "GENUINE_FIX: the patch adds the missing semicolon after the initializer "
                 "and keeps the rest of the program intact.",
    },
    {
        "error_type": "undeclared_identifier",
        "error_number": "C2065",
        "error_detail": "undeclared identifier",
        "difficulty": "medium",
        "buggy": """#include <cstdio>

int main() {
    total += 1;
    std::printf("%d\\n", total);
    return 0;
}""",
        "patch": """#include <cstdio>

int main() {
    return 0;
}""",
        "patch_status": CompileStatus.PASS,
        "judge": "TRIVIAL_DELETION: the patch removes every statement that used the "
                 "undeclared variable instead of declaring it.",
    },
    {
        "error_type": "type_conversion",
        "error_number": "C2440",
        "error_detail": "cannot convert from 'int' to 'const char *'",
        "difficulty": "medium_hard",
        "buggy": """int main() {
    const char* text = 42;
    return 0;
}""",
        "patch": """#include <string>

int main() {
    std::string text = std::to_string(42)
    return 0;
}""",
        "patch_status": CompileStatus.FAIL,
        "judge": "GENUINE_FIX: the patch resolves the invalid pointer initialization by "
                 "converting the integer to a string value.",
    },
    {
        "error_type": "missing_member",
        "error_number": "C2039",
        "error_detail": "'attempts' is not a member of 'Config'",
        "difficulty": "hard",
        "buggy": """struct Config {
    int retries;
};

int main() {
    Config c{};
    return c.attempts;
}""",
        "patch": """struct Config {
    int retries;
};

int main() {
    Config c{};
    return c.attempts();
}""",
        "patch_status": CompileStatus.FAIL,
        "judge": "INVALID_FIX: the patch still reads a member that does not exist, so the "
                 "original diagnostic remains.",
    },
]


def write_eval_fixtures(store: FixtureStore) -> None:
    actor_template = load_role_template(ModelRole.ACTOR)
    judge_template = load_role_template(ModelRole.SEMANTIC_JUDGE)
    records = []
    patches = {}
    for case in EVAL_CASES:
        stderr = compile_or_die(case["buggy"], CompileStatus.FAIL)
        compile_or_die(case["patch"], case["patch_status"])
        target = ErrorTarget(case["error_type"], case["error_number"], case["error_detail"])
        record = DatasetRecord(
            id=record_id_for(target, case["buggy"]),
            error_type=case["error_type"],
            error_number=case["error_number"],
            error_detail=case["error_detail"],
            buggy_source=case["buggy"],
            compiler_message=stderr,
            difficulty=DifficultyLevel(case["difficulty"]),
            provenance=Provenance.SYNTHETIC,
            verified=True,
        )
        records.append(record)
        patches[record.id] = case["patch"]

        actor_prompt = render_prompt(
            actor_template,
            {"buggy_source": case["buggy"], "compiler_message": stderr},
        )
        store.put(
            fixture_key(ModelRole.ACTOR, actor_prompt),
            ModelRole.ACTOR,
            actor_prompt,
            f"Here is the repaired file:\n{fence(case['patch'])}",
        )
        judge_prompt = render_prompt(
            judge_template,
            {
                "buggy_source": case["buggy"],
                "compiler_message": stderr,
                "fixed_source": case["patch"],
            },
        )
        store.put(
            fixture_key(ModelRole.SEMANTIC_JUDGE, judge_prompt),
            ModelRole.SEMANTIC_JUDGE,
            judge_prompt,
            case["judge"],
        )
    write_dataset(Dataset(records=records), FIXTURES / "eval_dataset.jsonl")
    (FIXTURES / "eval_patches.json").write_text(
        json.dumps(patches, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
    )


# ------------------------------------------------------------ golden corpus

PASS_SNIPPETS = [
    "int main() { return 0; }",
    "#include <vector>\n\nint sum(const std::vector<int>& v) {\n    int s = 0;\n    for (int x : v) s += x;\n    return s;\n}",
    "#include <string>\n\nstd::string greet(const std::string& name) {\n    return \"hello \" + name;\n}",
    "template <typename T>\nT twice(T value) {\n    return value + value;\n}\n\nint main() {\n    return twice(0);\n}",
    "#include <map>\n\nint lookup(const std::map<int, int>& m, int k) {\n    auto it = m.find(k);\n    return it == m.end() ? -1 : it->second;\n}",
    "struct Counter {\n    int value = 0;\n    void bump() { ++value; }\n};\n\nint main() {\n    Counter c;\n    c.bump();\n    return c.value;\n}",
    "#include <algorithm>\n#include <vector>\n\nvoid order(std::vector<int>& v) {\n    std::sort(v.begin(), v.end());\n}",
    "#include <memory>\n\nint main() {\n    auto p = std::make_unique<int>(7);\n    return *p;\n}",
    "enum class Mode { off, on };\n\nint main() {\n    Mode m = Mode::on;\n    return m == Mode::on ? 0 : 1;\n}",
    "#include <array>\n\nconstexpr int first(const std::array<int, 3>& a) {\n    return a[0];\n}\n\nint main() {\n    return first({0, 1, 2});\n}",
]

FAIL_SNIPPETS = [
    "int main() {\n    int x = 1\n    return x;\n}",
    "int main() {\n    return missing_symbol;\n}",
    "int main() {\n    const char* s = 99;\n    return 0;\n}",
    "struct Empty {};\n\nint main() {\n    Empty e;\n    return e.size;\n}",
    "#include <vector>\n\nint main() {\n    std::vector<int> v;\n    v.push_back(\"text\");\n    return 0;\n}",
    "int add(int a, int b);\n\nint main() {\n    return add(1);\n}",
    "class Sealed {\n    int hidden;\n};\n\nint main() {\n    Sealed s;\n    return s.hidden;\n}",
    "int main() {\n    unknown_type value;\n    return 0;\n}",
    "int main() {\n    for (int i = 0; i < 10 i++) {\n    }\n    return 0;\n}",
    "namespace a { int x = 1; }\n\nint main() {\n    return b::x;\n}",
]


def write_golden_corpus() -> None:
    if GOLDEN_DIR.exists():
        shutil.rmtree(GOLDEN_DIR)
    GOLDEN_DIR.mkdir(parents=True)
    manifest = []
    for kind, snippets, expect in (
        ("pass", PASS_SNIPPETS, CompileStatus.PASS),
        ("fail", FAIL_SNIPPETS, CompileStatus.FAIL),
    ):
        for index, source in enumerate(snippets):
            compile_or_die(source, expect)
            name = f"{kind}_{index:02d}.cpp"
            (GOLDEN_DIR / name).write_text(source + "\n", encoding="utf-8")
            manifest.append({"file": name, "status": expect.value})
    (GOLDEN_DIR / "manifest.json").write_text(
        json.dumps(manifest, indent=1) + "\n", encoding="utf-8"
    )


def main() -> int:
    if GATEWAY_DIR.exists():
        shutil.rmtree(GATEWAY_DIR)
    FIXTURES.mkdir(parents=True, exist_ok=True)
    store = FixtureStore(GATEWAY_DIR)
    write_forge_fixtures(store)
    write_eval_fixtures(store)
    write_golden_corpus()
    n_fixtures = len(list(GATEWAY_DIR.glob("*.json")))
    print(f"wrote {n_fixtures} gateway fixtures, 4 eval records, 20 golden snippets")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
