import org.junit.Test;

public class InterfaceHelperTest {

    interface Shape {
        double area();

        default String describe() {
            return "area=" + area();
        }
    }

    static class Square implements Shape {
        private final double side;

        Square(double side) {
            this.side = side;
        }

        @Override
        public double area() {
            return side * side;
        }
    }

    @Test
    public void computesArea() {
        Shape s = new Square(3);
        assertEquals(9.0, s.area(), 0.0);
        assertEquals("area=9.0", s.describe());
    }
}
