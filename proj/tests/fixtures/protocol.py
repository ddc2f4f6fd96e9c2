import sys


def serve(label_of):
    while True:
        line = sys.stdin.readline()
        if not line:
            return
        n = int(line)
        rows = [sys.stdin.readline().rstrip("\n").split(",") for _ in range(n)]
        sys.stdout.write("".join(label_of(r) + "\n" for r in rows))
        sys.stdout.flush()
