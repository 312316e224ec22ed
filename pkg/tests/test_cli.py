import json
import subprocess
import sys
from pathlib import Path

from patchlang.cli import main
from patchlang.document import PatchDocument, serialize
from patchlang.samples import bubble_sort_document, label_demo_program

REPO = Path(__file__).resolve().parent.parent
BUBBLE = REPO / "samples" / "bubble_sort.patch.json"


def test_repo_sample_matches_builder():
    assert BUBBLE.read_text(encoding="utf-8") == \
        serialize(bubble_sort_document())


def test_check_clean_document(capsys):
    assert main(["check", str(BUBBLE)]) == 0
    out = capsys.readouterr()
    assert out.err == ""


def test_check_reports_findings_on_stderr(tmp_path, capsys):
    program = label_demo_program()
    arms = [g for g in program.modules[0].steps["3"].children
            if g.tag == "arm"]
    arms[1].label = arms[0].label
    doc = tmp_path / "bad.patch.json"
    doc.write_text(serialize(PatchDocument(program=program)),
                   encoding="utf-8")
    assert main(["check", str(doc)]) == 1
    out = capsys.readouterr()
    assert "rule=label-unique" in out.err
    assert "step=3" in out.err
    assert out.out == ""


def test_check_missing_file(capsys):
    assert main(["check", "/nonexistent/x.patch.json"]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_run_prints_canonical_output(capsys):
    code = main(["run", str(BUBBLE), "--in",
                 "list=[29, -4, 2, 17, 45, 9]"])
    assert code == 0
    out = capsys.readouterr()
    assert out.out == "[-4, 2, 9, 17, 29, 45]\n"


def test_run_empty_list(capsys):
    assert main(["run", str(BUBBLE), "--in", "list=[]"]) == 0
    assert capsys.readouterr().out == "[]\n"


def test_run_json_mode(capsys):
    assert main(["run", str(BUBBLE), "--in", "list=[3, 1]", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["outputs"] == {"list": "[1, 3]"}
    assert payload["stopped"] is True


def test_run_unresolvable_inputs(capsys):
    assert main(["run", str(BUBBLE), "--in", "wrong=[1]"]) == 3
    assert capsys.readouterr().err != ""


def test_trace_emits_wire_events(capsys):
    assert main(["trace", str(BUBBLE), "--in", "list=[2, 1]"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    events = [json.loads(line) for line in lines]
    assert events[0]["kind"] == "enter"
    assert any(e["kind"] == "swap" for e in events)
    seqs = [e["seq"] for e in events]
    assert seqs == sorted(seqs)


def test_emit_writes_source(tmp_path, capsys):
    assert main(["emit", str(BUBBLE), "--dialect", "cxx",
                 "--out", str(tmp_path)]) == 0
    out_path = Path(capsys.readouterr().out.strip())
    assert out_path.exists()
    assert "bubblesort" in out_path.name
    assert "int main()" in out_path.read_text(encoding="utf-8")


def test_diff_summary_line_and_determinism(tmp_path, capsys):
    args = ["diff", str(BUBBLE), "--dialect", "py3", "--trials", "5",
            "--seed", "7", "--workdir", str(tmp_path)]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert first.strip().splitlines()[-1] == "agree=5/5"
    assert main(args) == 0
    assert capsys.readouterr().out == first


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "patchlang.cli", "run", str(BUBBLE),
         "--in", "list=[5, 4]"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == "[4, 5]\n"
    assert proc.stderr == ""
