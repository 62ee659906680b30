int id(int x) { return x; }

void one() {
  int x = id(1);
  1 / x;
}

void zero() { id(0); }

void main() {
  one();
  zero();
}
