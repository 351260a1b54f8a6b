package org.example.calc;

import static org.junit.jupiter.api.Assertions.assertEquals;

import org.junit.jupiter.api.Test;

public class CalculatorTest {

    private final Calculator calc = new Calculator();

    @Test
    void addsTwoNumbers() {
        int result = calc.add(2, 3);
        assertEquals(5, result);
    }

    @Test
    void subtracts() {
        assertEquals(-1, calc.subtract(2, 3));
    }
}
