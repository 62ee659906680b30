int twice(int x) { return 2; }

void main() {
  int a = 7 / 2;
  int b = twice(a);
}
