typedef unsigned short int bits16;
typedef unsigned int bits32;
typedef unsigned long long int bits64;

void mul64To128(bits64 a, bits64 b, bits64 *z0Ptr, bits64 *z1Ptr);
