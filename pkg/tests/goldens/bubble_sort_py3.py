# generated by patchlang (dialect: py3)
import ast as _ast
import json as _json
import sys as _sys


class _Stop(Exception):
    pass


def _next_line():
    line = _sys.stdin.readline()
    if not line:
        _sys.stderr.write("out of input\n")
        _sys.exit(2)
    return line.rstrip("\n")


def _rd(text):
    out = []
    i = 0
    in_str = False
    while i < len(text):
        ch = text[i]
        if in_str:
            out.append(ch)
            if ch == "\\" and i + 1 < len(text):
                out.append(text[i + 1])
                i += 2
                continue
            if ch == '"':
                in_str = False
            i += 1
            continue
        if ch == '"':
            in_str = True
            out.append(ch)
            i += 1
            continue
        if text.startswith("TRUE", i):
            out.append("True")
            i += 4
            continue
        if text.startswith("FALSE", i):
            out.append("False")
            i += 5
            continue
        out.append(ch)
        i += 1
    return _ast.literal_eval("".join(out))


def _show(v):
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if v == int(v) and abs(v) < 1e16:
            return f"{v:.1f}"
        return repr(v)
    if isinstance(v, str):
        return _json.dumps(v, ensure_ascii=False)
    if isinstance(v, list):
        return "[" + ", ".join(_show(e) for e in v) + "]"
    raise ValueError(f"unshowable value: {v!r}")

def f_bubblesort(p_list):
    v_list = list(p_list)
    try:
        _s1 = ((len(v_list)) - (1))
        _e2 = 1
        for _it3 in range(_s1, _e2 - 1, -1):
            v_i = _it3
            _s4 = 1
            _e5 = v_i
            for _it6 in range(_s4, _e5 + 1):
                v_j = _it6
                if (((v_list)[(v_j) - 1]) > ((v_list)[(((v_j) + (1))) - 1])):
                    v_temp = (v_list)[(v_j) - 1]
                    v_list[(v_j) - 1] = (v_list)[(((v_j) + (1))) - 1]
                    v_list[(((v_j) + (1))) - 1] = v_temp
        raise _Stop()
    except _Stop:
        pass
    return (v_list,)

def main():
    a0 = _rd(_next_line())
    r = f_bubblesort(a0)
    print(_show(r[0]))


if __name__ == "__main__":
    main()
