import sys

n = int(sys.stdin.readline())
for _ in range(n):
    sys.stdin.readline()
sys.stdout.write("yes\n")
sys.stdout.flush()
